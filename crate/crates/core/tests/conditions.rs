use specdisc_core::conditions::{
    cond_thm313, cond_thm35, cond_thm36, sandwich_per_center, verify_example54, xi_nonempty_check, CellField,
    DomainFamily, Example54Options, TraceOptions,
};
use specdisc_core::densesys::cantor_cylinder;
use specdisc_core::geometry::GammaRule;
use specdisc_core::potentials::{Alpha, NRule, ValphaPotential};

fn centers() -> Vec<Vec<f64>> {
    (2..=10).map(|k| vec![k as f64 + 0.5, 0.5, 0.5]).collect()
}

fn potential() -> ValphaPotential {
    ValphaPotential::new(3, Alpha::new(1.0).unwrap(), NRule::OnePlusLinear).unwrap()
}

#[test]
fn covering_trace_grows_for_small_gamma_and_vanishes_for_large() {
    let pot = potential();
    let v = |x: &[f64]| pot.eval(x).unwrap();
    let opts = TraceOptions {
        family: DomainFamily::Cube,
        resolution: 24,
        window: 9,
    };
    let small = GammaRule::Power {
        coeff: 0.05,
        exponent: 0.0,
    };
    let tr = cond_thm35(&v, &small, &centers(), 1.0 / 3.0, &opts).unwrap();
    assert!(
        tr.verdict.strictly_increasing && tr.verdict.diverging,
        "{:?}",
        tr.values()
    );
    // V vanishes on more than half of every window.
    let half = GammaRule::Power {
        coeff: 0.5,
        exponent: 0.0,
    };
    let tr = cond_thm35(&v, &half, &centers(), 1.0 / 3.0, &opts).unwrap();
    assert!(tr.values().iter().all(|x| *x == 0.0));
    assert!(!tr.verdict.diverging);
}

#[test]
fn rearrangement_trace_and_sandwich_on_valpha() {
    let pot = potential();
    let v = |x: &[f64]| pot.eval(x).unwrap();
    let opts = TraceOptions {
        family: DomainFamily::Cube,
        resolution: 24,
        window: 4,
    };
    let tr = cond_thm36(&v, &GammaRule::power(1.0), &centers(), 1.0 / 3.0, &opts).unwrap();
    assert!(tr.values().iter().all(|x| *x == 0.0));
    for theta in [1.5, 4.0] {
        let checks = sandwich_per_center(&v, &GammaRule::power(0.5), theta, &centers(), 1.0 / 3.0, &opts).unwrap();
        assert!(checks.iter().all(|c| c.ok));
    }
}

#[test]
fn cell_condition_diverges_at_every_level() {
    let pot = potential();
    let ls: Vec<Vec<i64>> = (4..=9).map(|k| vec![k, 0, 0]).collect();
    for n in [1u32, 3] {
        let systems = move |l: &[i64]| cantor_cylinder(3, n, l);
        let tr = cond_thm313(&CellField::Valpha(&pot), &systems, &GammaRule::power(1.0), 3, n, &ls, 6).unwrap();
        let expected: Vec<f64> = ls.iter().map(|l| pot.amplitude.eval(l)).collect();
        assert_eq!(tr.values(), expected);
        assert!(tr.verdict.diverging);
    }
}

#[test]
fn xi_sets_are_nonempty_for_cantor_cylinders() {
    let systems = |l: &[i64]| cantor_cylinder(2, 4, l);
    let ls = vec![vec![0, 0], vec![3, -2], vec![-5, 7]];
    let rows = xi_nonempty_check(&systems, 3, &[1, 2, 3, 4], &ls).unwrap();
    assert_eq!(rows.len(), 3 * (1 + 2 + 3 + 4));
    assert!(rows.iter().all(|r| r.nonempty && r.j <= r.n));
}

#[test]
fn oscillating_cells_other_amplitudes() {
    for rule in [NRule::Log, NRule::Sqrt] {
        let rep = verify_example54(Alpha::rational(3, 2).unwrap(), rule, &Example54Options::default()).unwrap();
        assert!(rep.ok && rep.gmd_max_error <= 1e-12);
    }
    let bad = Example54Options {
        l_values: vec![2, 3],
        ..Example54Options::default()
    };
    assert!(verify_example54(Alpha::new(1.0).unwrap(), NRule::Linear, &bad).is_err());
    assert!(Alpha::new(0.0).is_err());
}
