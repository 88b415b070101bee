use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specdisc_core::densesys::{random_cubes, witness_is_valid, DenseSystem, Sampler, SystemIndex};
use specdisc_core::geometry::{madic_cells, AxisBox, Ball, CubeChart, Rat, RatBox, StarDomain};
use specdisc_core::measure::{build_grid, refine, restrict, WeightedSpace};
use specdisc_core::optcover::{brute_force_i, greedy_i, solve_j};
use specdisc_core::polyhedron::{f_prime, hl_dominance_check, DistortedMeasure, GridOptions, Region, SlabQuadrature};
use specdisc_core::potentials::{positivity_measure_exact, Alpha, NRule, ValphaPotential};
use specdisc_core::rearrange::{DistributionProfile, ScalarField};
use specdisc_core::spectral::{
    assemble, lowest_eigenvalues, rayleigh_quotient, window_monotonicity, EigenOptions, WindowPotential,
};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn grid_instance(seed: u64, n: usize) -> (WeightedSpace, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dens: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
    let values: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64 * 0.5).collect();
    let bbox = AxisBox::new(vec![0.0], vec![1.0]).unwrap();
    let space = build_grid(&bbox, &[n], |x| dens[((x[0] * n as f64) as usize).min(n - 1)]).unwrap();
    let space = space.with_values(&values).unwrap();
    (space, values)
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn partitions_add_up(seed in any::<u64>(), cuts in prop::collection::vec(0.0f64..1.0, 1..5)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bbox = AxisBox::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let a = rng.random_range(0.0..2.0);
        let space = build_grid(&bbox, &[7, 5], |x| 1.0 + a * x[0] * x[1]).unwrap();
        let mut edges = cuts.clone();
        edges.push(0.0);
        edges.push(1.01);
        edges.sort_by(f64::total_cmp);
        let mut total = 0.0;
        for w in edges.windows(2) {
            if let Ok(part) = restrict(&space, |c| c[0] >= w[0] && c[0] < w[1]) {
                total += part.total_mass();
            }
        }
        prop_assert!((total - space.total_mass()).abs() <= 1e-12 * space.total_mass());
    }

    #[test]
    fn rearrangements_are_monotone_and_refine_invariant(seed in any::<u64>(), n in 2usize..30, k in 2usize..6) {
        let (space, values) = grid_instance(seed, n);
        let field = ScalarField::new(values).unwrap();
        let prof = DistributionProfile::new(&field, &space).unwrap();
        let fine = refine(&space, k).unwrap();
        let fprof = DistributionProfile::new(&ScalarField::from_slots(&fine).unwrap(), &fine).unwrap();
        let total = space.total_mass();
        let ts: Vec<f64> = (1..40).map(|i| total * i as f64 / 40.0).collect();
        let mut prev = (f64::INFINITY, f64::NEG_INFINITY);
        for t in ts {
            let (up, down) = (prof.nonincreasing(t).unwrap(), prof.nondecreasing(t).unwrap());
            prop_assert!(up <= prev.0 && down >= prev.1);
            prev = (up, down);
            prop_assert_eq!(up, fprof.nonincreasing(t).unwrap());
            prop_assert_eq!(down, fprof.nondecreasing(t).unwrap());
        }
    }

    #[test]
    fn distribution_duality(seed in any::<u64>(), n in 2usize..30) {
        let (space, values) = grid_instance(seed, n);
        let field = ScalarField::new(values.clone()).unwrap();
        let prof = DistributionProfile::new(&field, &space).unwrap();
        let masses: Vec<f64> = space.masses().collect();
        for s in &values {
            let at: f64 = values.iter().zip(&masses).filter(|(v, _)| *v == s).map(|(_, m)| m).sum();
            let lhs = prof.lambda_lower(*s) + prof.lambda_upper(*s) - at;
            prop_assert!((lhs - space.total_mass()).abs() <= 1e-12 * space.total_mass());
        }
    }

    #[test]
    fn cover_sandwich_and_scaling(seed in any::<u64>(), n in 2usize..14, frac in 0.01f64..0.99, c in 0.1f64..10.0) {
        let (space, values) = grid_instance(seed, n);
        let field = ScalarField::new(values.clone()).unwrap();
        let t = frac * space.total_mass();
        let sol = solve_j(&field, &space, t).unwrap();
        let brute = brute_force_i(&field, &space, t).unwrap();
        let greedy = greedy_i(&field, &space, t).unwrap();
        let tol = 1e-12 * greedy.max(1.0);
        prop_assert!(sol.value <= brute + tol && brute <= greedy + tol);
        let scaled = solve_j(&field.scaled(c).unwrap(), &space, t).unwrap().value;
        prop_assert!((scaled - c * sol.value).abs() <= 1e-12 * scaled.abs().max(1.0));
        // Inside the cover the field is at most the threshold, outside at least.
        let mut inside = vec![false; n];
        for i in &sol.full {
            inside[*i] = true;
        }
        if let Some(p) = sol.partial {
            inside[p.position] = true;
        }
        for i in 0..n {
            if inside[i] {
                prop_assert!(values[i] <= sol.threshold);
            } else {
                prop_assert!(values[i] >= sol.threshold);
            }
        }
    }

    #[test]
    fn refinement_gap_shrinks(seed in any::<u64>(), n in 2usize..10, frac in 0.05f64..0.95) {
        let (space, _) = grid_instance(seed, n);
        let t = frac * space.total_mass();
        let gap = |k: usize| {
            let s = refine(&space, k).unwrap();
            let f = ScalarField::from_slots(&s).unwrap();
            let low = DistributionProfile::new(&f, &s).unwrap().nondecreasing(t).unwrap();
            let g = greedy_i(&f, &s, t).unwrap() - solve_j(&f, &s, t).unwrap().value;
            (g, s.max_mass() * low)
        };
        for k in [4usize, 16, 64] {
            let (g, bound) = gap(k);
            prop_assert!(g <= bound + 1e-12);
            prop_assert!(g <= 2.0 * gap(2).1 * 2.0 / k as f64 + 1e-12);
        }
    }

    #[test]
    fn star_domain_eccentricity(radii in prop::collection::vec(0.1f64..5.0, 1..20)) {
        let g = StarDomain::from_radii(3, radii.clone()).unwrap();
        prop_assert!(g.eccentricity() >= 1.0);
        prop_assert_eq!(g.eccentricity() == 1.0, radii.iter().all(|r| *r == radii[0]));
    }
}

proptest! {
    #![proptest_config(config(40))]

    #[test]
    fn madic_cells_tile_the_unit_cube(l in prop::collection::vec(-5i64..5, 1..3), n in 1u32..3) {
        for chart in [CubeChart::Centered, CubeChart::Corner] {
            let cells = madic_cells(&l, n, 3, chart).unwrap();
            let total = cells.iter().fold(Rat::zero(), |acc, c| acc + c.volume());
            let side: Rat = if chart == CubeChart::Centered { Rat::from_integer(2) } else { Rat::one() };
            let expected = (0..l.len()).fold(Rat::one(), |acc, _| acc * side);
            prop_assert_eq!(total, expected);
            let boxes: Vec<RatBox> = cells.iter().map(|c| c.to_rat_box()).collect();
            for (i, a) in boxes.iter().enumerate() {
                for b in &boxes[i + 1..] {
                    let overlap = a.lo.iter().zip(&a.hi).zip(b.lo.iter().zip(&b.hi)).all(|((al, ah), (bl, bh))| al.max(bl) < ah.min(bh));
                    prop_assert!(!overlap);
                }
            }
        }
    }

    #[test]
    fn dominance_on_random_boxes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ball = Ball::new(vec![rng.random_range(-1.0..1.0), 0.0, 0.5], rng.random_range(0.3..2.0)).unwrap();
        let quad = SlabQuadrature::new(DistortedMeasure::new(ball.clone()).unwrap(), GridOptions { slabs: 32, transverse: 32, allow_high_dim: false }).unwrap();
        let bb = ball.bounding_box();
        let regions: Vec<Region> = (0..50).map(|_| {
            let (mut lo, mut hi) = (vec![], vec![]);
            for k in 0..3 {
                let (a, b) = (rng.random_range(bb.lo[k]..bb.hi[k]), rng.random_range(bb.lo[k]..bb.hi[k]));
                lo.push(a.min(b));
                hi.push(a.max(b));
            }
            Region { lo, hi }
        }).collect();
        for m in hl_dominance_check(&quad, &regions) {
            prop_assert!(m.margin >= -1e-9 * m.bound.max(1.0));
        }
    }

    #[test]
    fn witnesses_recheck_and_robust_in_theta(seed in any::<u64>()) {
        let sys = DenseSystem::cantor(10).unwrap();
        let sampler = Sampler { seed, random: 200, ..Sampler::default() };
        let cubes = random_cubes(&sys, &sampler);
        let index = SystemIndex::new(sys.clone()).unwrap();
        let smaller = DenseSystem::new(3, Rat::new(1, 27), sys.ambient.clone(), sys.levels.clone()).unwrap();
        let small_index = SystemIndex::new(smaller).unwrap();
        for cube in &cubes {
            let w = index.witness(cube).unwrap();
            prop_assert!(w.is_some());
            let w = w.unwrap();
            prop_assert!(witness_is_valid(&sys, cube, &w));
            prop_assert!(w.level <= sys.level_bound(&cube.radius).unwrap());
            if let Ok(found) = small_index.witness(cube) {
                prop_assert!(found.is_some());
            }
        }
    }

    #[test]
    fn valpha_is_two_valued_per_cube(seed in any::<u64>(), k in -4i64..5) {
        let pot = ValphaPotential::new(2, Alpha::new(1.0).unwrap(), NRule::OnePlusLinear).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = vec![k, 1];
        let n = pot.amplitude.eval(&l);
        for _ in 0..500 {
            let x = vec![k as f64 + rng.random_range(1e-9..1.0), 1.0 + rng.random_range(1e-9..1.0)];
            let v = pot.eval(&x).unwrap();
            prop_assert!(v == 0.0 || v == n);
        }
    }
}

proptest! {
    #![proptest_config(config(10_000))]

    #[test]
    fn periodic_positivity_bounds(s in 0.5f64..500.0, beta in 0.001f64..0.999, a in -10.0f64..10.0, len in 0.0f64..5.0) {
        let b = a + len;
        let m = positivity_measure_exact(&s, &beta, &a, &b).unwrap();
        let slack = 1e-12 * (1.0 + len + 1.0 / s);
        prop_assert!(m <= beta * (b - a) + 2.0 * beta / s + slack);
        prop_assert!(m >= beta * (b - a) - 2.0 * beta / s - slack);
    }
}

proptest! {
    #![proptest_config(config(300))]

    #[test]
    fn periodic_positivity_bounds_exact(sn in 1i64..50, sd in 1i64..5, bn in 1i64..20, an in -40i64..40, ln in 0i64..40) {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let (s, beta, a, b) = (q(sn, sd), q(bn, 21), q(an, 7), q(an + ln, 7));
        let m = positivity_measure_exact(&s, &beta, &a, &b).unwrap();
        let two = q(2, 1);
        let spread = two * beta.clone() / s;
        let base = beta * (b - a);
        prop_assert!(m <= base.clone() + spread.clone());
        prop_assert!(m >= base - spread);
    }
}

#[test]
fn density_minimum_is_attained() {
    for d in [3usize, 4, 5] {
        let min = (0..=1000)
            .map(|i| f_prime(d, i as f64 / 1000.0))
            .fold(f64::INFINITY, f64::min);
        assert!((min - (d as f64 - 2.0) / d as f64).abs() < 1e-15);
        // f'(s) s^{2/d} is constant.
        let c = f_prime(d, 0.3) * 0.3f64.powf(2.0 / d as f64);
        assert!((f_prime(d, 0.7) * 0.7f64.powf(2.0 / d as f64) - c).abs() < 1e-14);
    }
}

#[test]
fn rayleigh_consistency_and_nested_windows() {
    let v = |x: &[f64]| 1.0 + (x[0] - 0.3).abs() + x[1] * x[1];
    let b = AxisBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    let op = assemble(&v, &b, 2.0 / 40.0).unwrap();
    let res = lowest_eigenvalues(&op.matrix, 4, &EigenOptions::default()).unwrap();
    for (val, vec) in res.values.iter().zip(&res.vectors) {
        assert!((rayleigh_quotient(&op.matrix, vec) - val).abs() <= 1e-8);
    }
    assert!(res.values.windows(2).all(|w| w[0] <= w[1]));
    let steps = window_monotonicity(
        &WindowPotential::Field(&v),
        &[0.5, 0.0],
        0.5,
        0.05,
        6,
        &EigenOptions::default(),
    )
    .unwrap();
    assert!(steps.iter().all(|s| s.ok));
}
