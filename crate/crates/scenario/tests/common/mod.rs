#![allow(dead_code)]

use cvfaraday::{FrameDirection, Quadrature};
use cvfaraday_scenario::ast::*;
use rand::seq::IndexedRandom;
use rand::Rng;

pub const SHIPPED: [&str; 4] = ["epr_thermal.cvf", "epr_enhanced.cvf", "eraser.cvf", "cluster4.cvf"];

pub fn scenario_path(name: &str) -> String {
    format!("{}/../../scenarios/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn shipped(name: &str) -> String {
    std::fs::read_to_string(scenario_path(name)).expect("shipped scenario")
}

fn sp<T>(node: T) -> Spanned<T> {
    Spanned::new(node, SourceSpan::default())
}

fn any_f64(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..4) {
        0 => rng.random_range(-10.0..10.0),
        1 => f64::from(rng.random_range(-50i32..50)) / 4.0,
        2 => rng.random_range(-1e-6..1e-6),
        _ => loop {
            let v = f64::from_bits(rng.random());
            if v.is_finite() {
                break v;
            }
        },
    }
}

#[derive(Default)]
struct Gen {
    params: Vec<String>,
    ensembles: Vec<String>,
    live_beams: Vec<String>,
    dead_beams: Vec<String>,
    counter: usize,
}

impl Gen {
    fn fresh(&mut self, prefix: &str) -> String {
        self.counter += 1;
        format!("{prefix}{}", self.counter)
    }

    fn num(&self, rng: &mut impl Rng) -> Num {
        if !self.params.is_empty() && rng.random_bool(0.3) {
            Num::Param(self.params.choose(rng).unwrap().clone())
        } else {
            Num::Lit(any_f64(rng))
        }
    }

    fn live(&self) -> Vec<String> {
        self.ensembles.iter().chain(&self.live_beams).cloned().collect()
    }

    fn ids(&self, rng: &mut impl Rng, max: usize) -> Vec<Ident> {
        let live = self.live();
        let k = rng.random_range(1..=max.min(live.len()));
        live.choose_multiple(rng, k).map(|s| sp(s.clone())).collect()
    }

    fn angle(&self, rng: &mut impl Rng) -> Angle {
        match rng.random_range(0..3) {
            0 => Angle::Radians(self.num(rng)),
            1 => Angle::Degrees(any_f64(rng)),
            _ => Angle::PiFraction {
                num: rng.random_range(-8..=8),
                den: rng.random_range(1..=12),
            },
        }
    }

    fn indices(&self, rng: &mut impl Rng, min: usize) -> Vec<usize> {
        (0..rng.random_range(min..=3)).map(|_| rng.random_range(1..=6)).collect()
    }

    fn report(&self, rng: &mut impl Rng) -> Report {
        let named = |rng: &mut dyn rand::RngCore| {
            if rng.random_bool(0.5) {
                Some(sp(format!("r{}", rng.random_range(0..100))))
            } else {
                None
            }
        };
        let kind = match rng.random_range(0..7) {
            0 => return Report { kind: ReportKind::State, name: None },
            1 => return Report { kind: ReportKind::Ppt(Partition::All), name: None },
            2 => ReportKind::Ppt(Partition::Split(self.ids(rng, 2), self.ids(rng, 2))),
            3 => ReportKind::Duan {
                a: self.ids(rng, 1).remove(0),
                b: self.ids(rng, 1).remove(0),
                lambda: sp(self.num(rng)),
            },
            4 => ReportKind::Vlf(Vlf::Named(
                *[DeltaName::Delta1, DeltaName::Delta2, DeltaName::Delta3].choose(rng).unwrap(),
            )),
            5 => {
                let n = rng.random_range(1..=4);
                ReportKind::Vlf(Vlf::Explicit(ExplicitVlf {
                    h: (0..n).map(|_| sp(self.num(rng))).collect(),
                    g: (0..n).map(|_| sp(self.num(rng))).collect(),
                    left: self.indices(rng, 1),
                    right: self.indices(rng, 1),
                    exchanged: self.indices(rng, 0),
                }))
            }
            _ => ReportKind::Variance(
                (0..rng.random_range(1..=3))
                    .map(|_| Term {
                        quadrature: if rng.random_bool(0.5) { Quadrature::X } else { Quadrature::P },
                        mode: self.ids(rng, 1).remove(0),
                        coeff: sp(self.num(rng)),
                    })
                    .collect(),
            ),
        };
        Report { kind, name: named(rng) }
    }

    fn statement(&mut self, rng: &mut impl Rng) -> StatementKind {
        loop {
            match rng.random_range(0..9) {
                0 => {
                    let name = self.fresh("k");
                    self.params.push(name.clone());
                    return StatementKind::Param {
                        name: sp(name),
                        value: sp(any_f64(rng)),
                    };
                }
                1 => {
                    let id = self.fresh("E");
                    let n = sp(self.num(rng));
                    self.ensembles.push(id.clone());
                    return StatementKind::Ensemble { id: sp(id), n };
                }
                2 => {
                    let id = if !self.dead_beams.is_empty() && rng.random_bool(0.5) {
                        let k = rng.random_range(0..self.dead_beams.len());
                        self.dead_beams.swap_remove(k)
                    } else {
                        self.fresh("B")
                    };
                    self.live_beams.push(id.clone());
                    return StatementKind::Beam { id: sp(id) };
                }
                3 if !self.live_beams.is_empty() && !self.ensembles.is_empty() => {
                    return StatementKind::Pass {
                        beam: sp(self.live_beams.choose(rng).unwrap().clone()),
                        sample: sp(self.ensembles.choose(rng).unwrap().clone()),
                        kappa: sp(self.num(rng)),
                        alpha: sp(self.angle(rng)),
                    };
                }
                4 if !self.live_beams.is_empty() => {
                    let k = rng.random_range(0..self.live_beams.len());
                    let beam = self.live_beams.swap_remove(k);
                    self.dead_beams.push(beam.clone());
                    return StatementKind::Measure {
                        beam: sp(beam),
                        quadrature: if rng.random_bool(0.5) { Quadrature::X } else { Quadrature::P },
                        policy: if rng.random_bool(0.5) {
                            Policy::Sample
                        } else {
                            Policy::Fixed(sp(self.num(rng)))
                        },
                    };
                }
                5 if !self.live().is_empty() => {
                    return StatementKind::Rotate {
                        direction: if rng.random_bool(0.5) {
                            FrameDirection::ToPrimed
                        } else {
                            FrameDirection::FromPrimed
                        },
                        targets: self.ids(rng, 3),
                    };
                }
                6 | 7 if !self.live().is_empty() => return StatementKind::Report(self.report(rng)),
                8 if !self.params.is_empty() => {
                    let start = any_f64(rng);
                    return StatementKind::Sweep {
                        param: sp(self.params.choose(rng).unwrap().clone()),
                        start,
                        stop: any_f64(rng),
                        step: rng.random_range(1e-3..5.0),
                    };
                }
                _ => {}
            }
        }
    }
}

/// A random syntax tree that satisfies every declaration rule.
pub fn random_ast(rng: &mut impl Rng) -> ScenarioAst {
    let mut g = Gen::default();
    let n = rng.random_range(0..40);
    ScenarioAst {
        statements: (0..n).map(|_| sp(g.statement(rng))).collect(),
    }
}

const VOCAB: [&str; 40] = [
    "param", "ensemble", "beam", "pass", "measure", "rotate", "report", "sweep", "as", "A1", "A2", "L1",
    "x", "p", "n=1", "kappa=1", "alpha=pi/4", "alpha=-pi/2", "alpha=45deg", "fixed=0", "sample",
    "to_primed", "from_primed", "ppt", "all", "A1|A2", "duan", "lambda=1", "vlf", "delta2",
    "variance", "x:A1=1", "state", "k=0.5", "$k", "0:1:0.1", "#", "=", "\t", "\u{00e9}",
];

/// Line soup built from scenario tokens and junk.
pub fn token_soup(rng: &mut impl Rng) -> String {
    let mut s = String::new();
    for _ in 0..rng.random_range(0..30) {
        for _ in 0..rng.random_range(0..7) {
            s.push_str(VOCAB.choose(rng).unwrap());
            s.push(' ');
        }
        s.push('\n');
    }
    s
}

/// Random byte edits of a valid file.
pub fn mutate(rng: &mut impl Rng, text: &str) -> Vec<u8> {
    let mut bytes = text.as_bytes().to_vec();
    for _ in 0..rng.random_range(1..8) {
        let i = rng.random_range(0..=bytes.len());
        match rng.random_range(0..3) {
            0 if i < bytes.len() => {
                bytes.remove(i);
            }
            1 => bytes.insert(i, rng.random()),
            _ if i < bytes.len() => bytes[i] = rng.random(),
            _ => {}
        }
    }
    bytes
}
