//! Datasets behind the published parameter-region and cluster plots.

use cvfaraday::protocols::{grid, run_cluster, run_epr, run_epr_enhanced};
use cvfaraday::{OutcomePolicy, SweepTable};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Entangled regions in `(n₁, n₂, κ)` for one and two beams, by PPT and
    /// by the Duan sum.
    Fig3,
    /// Cluster nullifier variances and Δ criteria against `κ`.
    Fig5,
}

impl Figure {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fig3" => Some(Self::Fig3),
            "fig5" => Some(Self::Fig5),
            _ => None,
        }
    }
}

const ZERO: OutcomePolicy<f64> = OutcomePolicy::Fixed(0.0);

fn fig3() -> cvfaraday::Result<SweepTable<f64>> {
    let ns = grid(1.0, 3.0, 0.1)?;
    let kappas = grid(0.0, 3.0, 0.05)?;
    let mut points = Vec::new();
    for beams in [1.0, 2.0] {
        for &n1 in &ns {
            for &n2 in &ns {
                for &k in &kappas {
                    points.push((beams, n1, n2, k));
                }
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|&(beams, n1, n2, k)| {
            let r = if beams == 1.0 {
                run_epr(n1, n2, k, ZERO)?
            } else {
                run_epr_enhanced(n1, n2, k, [ZERO; 2])?
            };
            let duan = r.reports.get("duan_lambda1").unwrap_or(f64::NAN);
            let ppt = r.reports.get("ppt_entangled").unwrap_or(f64::NAN);
            Ok(vec![beams, n1, n2, k, duan, if duan < 2.0 { 1.0 } else { 0.0 }, ppt])
        })
        .collect::<cvfaraday::Result<Vec<_>>>()?;
    let columns = ["beams", "n1", "n2", "kappa", "duan_lambda1", "duan_entangled", "ppt_entangled"];
    Ok(SweepTable {
        columns: columns.map(String::from).to_vec(),
        rows,
    })
}

fn fig5() -> cvfaraday::Result<SweepTable<f64>> {
    let names = ["var_p1_x2", "var_p2_x1_x3", "delta1", "delta2", "delta3"];
    let rows = grid(0.0, 0.8, 0.005)?
        .par_iter()
        .map(|&k| {
            let r = run_cluster(k, [ZERO; 4])?;
            let mut row = vec![k];
            row.extend(names.iter().map(|n| r.reports.get(n).unwrap_or(f64::NAN)));
            Ok(row)
        })
        .collect::<cvfaraday::Result<Vec<_>>>()?;
    let mut columns = vec!["kappa".to_string()];
    columns.extend(names.map(String::from));
    Ok(SweepTable { columns, rows })
}

pub fn figure_table(f: Figure) -> cvfaraday::Result<SweepTable<f64>> {
    match f {
        Figure::Fig3 => fig3(),
        Figure::Fig5 => fig5(),
    }
}
