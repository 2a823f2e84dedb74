//! Built-in scenarios, one or more per stability or equivalence result.

use quadlab_core::polarization::IdentityMode;
use quadlab_core::stability::{BoundFamily, Direction};
use quadlab_core::{EquationSpec, Field, Mapping, ModulePoint, QuasiNormSpec};

use crate::run::RunStatus;
use crate::scenario::{
    Action, BoundEqualitySpec, ControlSpec, CovarianceSpec, DeadZoneSpec, Experiment, IdentityExpectation,
    InnerProductSpec, OracleSpec, Outputs, ProbeSpec, Scenario, SpaceExpectation, StabilitySpec,
};

pub const DEFAULT_SEED: u64 = 20240917;

pub struct Preset {
    pub name: &'static str,
    /// The statement the preset exercises.
    pub tag: &'static str,
    pub description: &'static str,
    /// What a correct implementation reports.
    pub expect: RunStatus,
    build: fn() -> Experiment,
}

impl Preset {
    pub fn scenario(&self, seed: u64) -> Scenario {
        Scenario {
            name: self.name.to_string(),
            seed,
            outputs: Outputs::default(),
            experiment: (self.build)(),
        }
    }
}

fn base(n: usize, mapping: Mapping, control: ControlSpec, norm: QuasiNormSpec, probes: ProbeSpec) -> StabilitySpec {
    StabilitySpec {
        n,
        mapping,
        control,
        norm,
        codomain_norm: None,
        k: 1,
        field: Field::Real,
        family: BoundFamily::Quasi,
        direction: Direction::Forward,
        m_max: 60,
        tol: 1e-9,
        series_tol: 1e-12,
        precheck_samples: 200,
        probes,
    }
}

fn lp(p: f64, dim: usize) -> QuasiNormSpec {
    QuasiNormSpec::lp(p, dim).expect("valid exponent")
}

fn sampled(count: usize) -> ProbeSpec {
    ProbeSpec::Sampled { count, half_width: 10.0 }
}

fn line(norms: &[f64]) -> ProbeSpec {
    ProbeSpec::Ray {
        direction: ModulePoint::from_reals(&[1.0]),
        norms: norms.to_vec(),
    }
}

fn form(m: [[f64; 2]; 2]) -> Mapping {
    Mapping::QuadraticForm {
        coefficients: m.iter().map(|r| r.to_vec()).collect(),
    }
}

/// A quadratic map `R^2 -> R^2` plus a perturbation in each component.
fn planar(bump: Mapping, amplitude: f64) -> Mapping {
    Mapping::Stack {
        components: vec![
            Mapping::perturbed(form([[1.0, 0.5], [0.5, 2.0]]), bump.clone(), amplitude),
            Mapping::perturbed(form([[-1.0, 0.0], [0.0, 0.5]]), bump, amplitude / 2.0),
        ],
    }
}

fn oracle(a: EquationSpec, b: EquationSpec, q: u64, d: usize) -> Experiment {
    Experiment::Oracle(OracleSpec {
        a,
        b,
        q,
        d,
        expect: SpaceExpectation::Equal,
    })
}

fn thm24() -> Experiment {
    oracle(EquationSpec::Fe3 { n: 3 }, EquationSpec::Fe1, 5, 1)
}

fn lem21() -> Experiment {
    oracle(EquationSpec::Fe2, EquationSpec::Fe1, 7, 2)
}

fn lem23() -> Experiment {
    oracle(EquationSpec::Fe3Zero { a: 2 }, EquationSpec::Fe1, 5, 2)
}

fn cor25_euclidean() -> Experiment {
    Experiment::InnerProduct(InnerProductSpec {
        norm: QuasiNormSpec::euclidean(3),
        modes: vec![IdentityMode::B { a: 2 }, IdentityMode::C { n: 3 }],
        trials: 10_000,
        expect: IdentityExpectation::Holds,
    })
}

fn cor25_l1() -> Experiment {
    Experiment::InnerProduct(InnerProductSpec {
        norm: QuasiNormSpec::l1(2),
        modes: vec![IdentityMode::B { a: 2 }],
        trials: 10_000,
        expect: IdentityExpectation::Violated,
    })
}

fn cor33_forward() -> Experiment {
    // t^2 + t^3 / (20 (1 + t^2)): the perturbation grows linearly
    let f = Mapping::perturbed(Mapping::square(), Mapping::Rational, 0.05);
    let norms: Vec<f64> = (1..=20).map(|i| i as f64 / 2.0).collect();
    Experiment::Stability(base(
        3,
        f,
        ControlSpec::Power { epsilon: 1.0, r: 1.0 },
        QuasiNormSpec::euclidean(1),
        line(&norms),
    ))
}

fn cor33_backward() -> Experiment {
    let f = Mapping::perturbed(Mapping::square(), Mapping::Monomial { degree: 3 }, 0.05);
    let norms: Vec<f64> = (1..=20).map(|i| i as f64 / 2.0).collect();
    let mut s = base(
        3,
        f,
        ControlSpec::FitPower {
            r: 3.0,
            trials: 5000,
            half_width: 10.0,
        },
        QuasiNormSpec::euclidean(1),
        line(&norms),
    );
    s.direction = Direction::Backward;
    Experiment::Stability(s)
}

fn cor35_constant() -> Experiment {
    Experiment::Stability(base(
        3,
        Mapping::perturbed(Mapping::square(), Mapping::Sine, 0.1),
        ControlSpec::Constant { theta: 1.2 },
        QuasiNormSpec::euclidean(1),
        sampled(40),
    ))
}

fn cor35_quasi() -> Experiment {
    let mut s = base(
        3,
        planar(Mapping::Sine, 0.1),
        ControlSpec::FitConstant {
            trials: 5000,
            half_width: 10.0,
        },
        lp(0.5, 2),
        sampled(40),
    );
    s.codomain_norm = Some(lp(0.5, 2));
    Experiment::Stability(s)
}

fn cor43(p: f64) -> Experiment {
    let norm = if p == 1.0 { QuasiNormSpec::l1(2) } else { lp(p, 2) };
    let mut s = base(
        3,
        planar(Mapping::Rational, 0.05),
        ControlSpec::FitPower {
            r: 1.0,
            trials: 5000,
            half_width: 10.0,
        },
        norm.clone(),
        sampled(40),
    );
    s.codomain_norm = Some(norm);
    s.family = BoundFamily::PNorm;
    Experiment::Stability(s)
}

fn cor43_p1() -> Experiment {
    cor43(1.0)
}

fn cor43_half() -> Experiment {
    cor43(0.5)
}

fn rem44() -> Experiment {
    Experiment::BoundEquality(BoundEqualitySpec {
        ns: vec![3, 4, 5, 6],
        rs: vec![0.5, 1.0, 1.5, 3.0, 4.0],
        epsilons: vec![0.5, 1.0, 2.0],
        norms: vec![0.5, 1.0, 2.0, 10.0],
        rel_tol: 1e-12,
        series_tol: 1e-12,
    })
}

fn matrix_run(k: usize) -> StabilitySpec {
    let mut s = base(
        3,
        Mapping::perturbed(Mapping::MatrixSquare, Mapping::Sine, 0.1),
        ControlSpec::FitConstant {
            trials: 2000,
            half_width: 10.0,
        },
        QuasiNormSpec::euclidean(1),
        sampled(10),
    );
    s.k = k;
    s.field = Field::Complex;
    s
}

fn thm31_covariance() -> Experiment {
    Experiment::Covariance(CovarianceSpec {
        run: matrix_run(2),
        action: Action::Unitary { count: 100 },
        tol: 1e-6,
    })
}

fn thm45_scalar() -> Experiment {
    Experiment::Covariance(CovarianceSpec {
        run: matrix_run(1),
        action: Action::Scalar { count: 100 },
        tol: 1e-6,
    })
}

fn open_problem() -> Experiment {
    Experiment::DeadZone(DeadZoneSpec {
        n: 3,
        theta: 1.0,
        ks: vec![1.0, 2.0, 3.0, 3.5, 4.0, 5.0],
    })
}

static PRESETS: &[Preset] = &[
    Preset {
        name: "thm24-oracle",
        tag: "Theorem 2.4",
        description: "fe3 with n = 3 and fe1 have the same solutions over F_5",
        expect: RunStatus::Pass,
        build: thm24,
    },
    Preset {
        name: "lem21-oracle",
        tag: "Lemma 2.1",
        description: "fe2 and fe1 have the same solutions over F_7^2",
        expect: RunStatus::Pass,
        build: lem21,
    },
    Preset {
        name: "lem23-oracle",
        tag: "Lemma 2.3",
        description: "fe3_0 with a = 2 and fe1 have the same solutions over F_5^2",
        expect: RunStatus::Pass,
        build: lem23,
    },
    Preset {
        name: "cor25-euclidean",
        tag: "Corollary 2.5",
        description: "the Euclidean norm on R^3 satisfies both inner-product identities",
        expect: RunStatus::Pass,
        build: cor25_euclidean,
    },
    Preset {
        name: "cor25-l1",
        tag: "Corollary 2.5",
        description: "the l1 norm on R^2 violates the a-identity at the unit vectors",
        expect: RunStatus::Pass,
        build: cor25_l1,
    },
    Preset {
        name: "cor33-forward",
        tag: "Corollary 3.3",
        description: "t^2 + t^3/(20(1+t^2)) against the bound 5/6 ||x|| (K = 1, r = 1)",
        expect: RunStatus::Pass,
        build: cor33_forward,
    },
    Preset {
        name: "cor33-backward",
        tag: "Corollary 3.3",
        description: "t^2 + t^3/20 by the backward scheme with fitted epsilon, r = 3",
        expect: RunStatus::Pass,
        build: cor33_backward,
    },
    Preset {
        name: "cor35-constant",
        tag: "Corollary 3.5",
        description: "t^2 + sin(t)/10 with theta = 1.2 against the bound 2/3",
        expect: RunStatus::Pass,
        build: cor35_constant,
    },
    Preset {
        name: "cor35-quasi",
        tag: "Corollary 3.5",
        description: "bounded perturbation of a quadratic map on l^(1/2)(R^2), K = 2, fitted theta",
        expect: RunStatus::Pass,
        build: cor35_quasi,
    },
    Preset {
        name: "cor43-p1",
        tag: "Corollary 4.3",
        description: "p-norm bounds with p = 1 on l1(R^2), fitted epsilon, r = 1",
        expect: RunStatus::Pass,
        build: cor43_p1,
    },
    Preset {
        name: "cor43-p-half",
        tag: "Corollary 4.3",
        description: "p-norm bounds with p = 1/2 on l^(1/2)(R^2), fitted epsilon, r = 1",
        expect: RunStatus::Pass,
        build: cor43_half,
    },
    Preset {
        name: "rem44-equality",
        tag: "Remark 4.4",
        description: "modulus K = 1 and exponent p = 1 give the same bounds",
        expect: RunStatus::Pass,
        build: rem44,
    },
    Preset {
        name: "thm31-covariance",
        tag: "Theorem 3.1",
        description: "the limit of perturbed matrix squaring on M_2(C) commutes with unitary conjugation",
        expect: RunStatus::Pass,
        build: thm31_covariance,
    },
    Preset {
        name: "thm45-scalar",
        tag: "Theorem 4.5",
        description: "over the scalar algebra the limit satisfies Q(ax) = |a|^2 Q(x)",
        expect: RunStatus::Pass,
        build: thm45_scalar,
    },
    Preset {
        name: "open-problem-3.6",
        tag: "Problem 3.6",
        description: "constant-control bounds for n = 3 as K sweeps through (n-1)^2 = 4",
        expect: RunStatus::Rejected,
        build: open_problem,
    },
];

pub fn presets() -> &'static [Preset] {
    PRESETS
}

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn list_presets() -> Vec<(&'static str, &'static str, &'static str)> {
    PRESETS.iter().map(|p| (p.name, p.tag, p.description)).collect()
}

