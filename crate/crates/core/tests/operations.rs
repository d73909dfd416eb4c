use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use floquet_core::floquet::{
    defect_map, factorization_error, floquet_generator_exact, floquet_generator_exact_with, lindbladian_fourier, magnus_generator, magnus_terms,
    micromotion_fourier, micromotion_ode, steady_state_block, stroboscopic_evolve,
};
use floquet_core::linalg::{c, eigenvalues, max_norm, CMatrix};
use floquet_core::models::{
    model1_lindbladian, model1_magnus_analytic, model2_geometry, model2_lindbladian, model2_magnus_analytic,
    Model1Params, Model2Params,
};
use floquet_core::propagation::{
    evolve_state, evolve_state_with, monodromy, propagate, propagate_with, AdaptiveOptions, Scheme,
};
use rand::{rngs::StdRng, Rng, SeedableRng};
use floquet_core::studies::{magnus_convergence, micromotion_convergence, scaling_study, steady_state_convergence};
use floquet_core::superop::{
    expectation, lindblad_superop, pauli, trace_distance, trace_norm_distance, vectorize, DensityMatrix,
    JumpOperator, LindbladTerms, Observable, Superoperator,
};

fn model1(omega: f64) -> floquet_core::PeriodicLindbladian {
    model1_lindbladian(&Model1Params::new(1.0, 0.2, omega)).unwrap()
}

#[test]
fn amplitude_damping_population_decays_at_twice_the_rate() {
    let gamma = 0.3;
    let g = lindblad_superop(
        &LindbladTerms::new(
            Observable::new(CMatrix::zeros(2, 2)).unwrap(),
            vec![JumpOperator {
                operator: pauli::sigma_minus(),
                rate: gamma,
            }],
        )
        .unwrap(),
    )
    .unwrap();
    for t in [0.0, 0.4, 1.3, 5.0] {
        let rho = DensityMatrix::new(g.exp(t).apply(DensityMatrix::excited().data())).unwrap();
        let sz = expectation(&Observable::sigma_z(), &rho).unwrap();
        assert_abs_diff_eq!(sz, 2.0 * (-2.0 * gamma * t).exp() - 1.0, epsilon = 1e-13);
    }
}

#[test]
fn model1_step_halving_converges() {
    let l = model1(2.0);
    let coarse = propagate_with(&l, 0.0, l.period(), 1024, Scheme::Magnus4).unwrap();
    let fine = propagate_with(&l, 0.0, l.period(), 2048, Scheme::Magnus4).unwrap();
    assert!(coarse.map.max_abs_diff(&fine.map) < 1e-10);
    // The midpoint rule gets there too, quadratically.
    let a = propagate(&l, 0.0, l.period(), 2048).unwrap();
    let b = propagate(&l, 0.0, l.period(), 4096).unwrap();
    let d = a.map.max_abs_diff(&b.map);
    let e = b.map.max_abs_diff(&propagate(&l, 0.0, l.period(), 8192).unwrap().map);
    assert!((d / e - 4.0).abs() < 0.1);
}

#[test]
fn model1_monodromy_preserves_trace() {
    let mono = monodromy(&model1(2.0), 0.0).unwrap();
    assert!(mono.map.propagator_trace_defect() < 1e-10);
}

#[test]
fn model1_trajectory_is_self_converged() {
    let l = model1(2.0);
    let grid: Vec<f64> = (0..200).map(|k| 10.0 * l.period() * k as f64 / 199.0).collect();
    let rho0 = DensityMatrix::excited();
    let reference = evolve_state(&l, &rho0, &grid).unwrap();
    let tight = evolve_state_with(&l, &rho0, &grid, &AdaptiveOptions::with_tol(1e-13)).unwrap();
    for (a, b) in reference.iter().zip(&tight) {
        assert!(trace_distance(a, b).unwrap() < 1e-8);
    }
}

#[test]
fn dissipative_floquet_spectrum_is_contractive() {
    let gen = floquet_generator_exact(&model1(3.0), 0.0).unwrap();
    for z in eigenvalues(gen.generator.data()).unwrap() {
        assert!(z.re <= 1e-10, "eigenvalue {z}");
    }
}

#[test]
fn model1_fourier_content_is_second_harmonic() {
    let series = lindbladian_fourier(&model1(2.0), 4, 64).unwrap();
    for (m, coeff) in series.iter() {
        let size = coeff.max_abs();
        if m == 0 || m.abs() == 2 {
            assert!(size > 1e-3, "m = {m}");
        } else {
            assert!(size < 1e-12, "m = {m}: {size}");
        }
    }
}

#[test]
fn model2_hamiltonian_part_is_first_harmonic() {
    let mut p = Model2Params::default();
    p.gamma = 0.0;
    let series = lindbladian_fourier(&model2_lindbladian(&p).unwrap(), 3, 64).unwrap();
    for (m, coeff) in series.iter() {
        if m.abs() > 1 {
            assert!(coeff.max_abs() < 1e-12, "m = {m}");
        }
    }
    assert!(series.coefficient(1).unwrap().max_abs() > 1e-3);
}

/// Compared through one-period maps: below ω = 4Ω the principal logarithm
/// folds the coherent quasi-energies and is a different element of the
/// generator family than the Magnus series.
#[test]
fn magnus_order_two_improves_on_order_zero_at_high_frequency() {
    for omega in [3.0, 4.0, 6.0, 10.0] {
        let l = model1(omega);
        let mono = monodromy(&l, 0.0).unwrap().map;
        let period = l.period();
        let g0 = magnus_generator(&l, 0, 16).unwrap().generator;
        let g2 = magnus_generator(&l, 2, 16).unwrap().generator;
        assert!(
            g2.exp(period).max_abs_diff(&mono) <= g0.exp(period).max_abs_diff(&mono),
            "ω = {omega}"
        );
    }
}

/// For 𝓛 → ε𝓛 the exact log is εΦ₀ + ε²Φ₁ + ε³Φ₂ + O(ε⁴); two-level
/// Richardson extrapolation of the ε³ coefficient isolates the second-order
/// term.
#[test]
fn second_order_term_matches_weak_drive_expansion() {
    let l = model1(3.0);
    let terms = magnus_terms(&l, 0.0, 2, 16).unwrap();
    let cubic = |eps: f64| {
        let inner = l.clone();
        let scaled = floquet_core::PeriodicLindbladian::new("scaled", l.period(), 2, move |t| inner.at(t).scale(c(eps)))
            .unwrap();
        let log = floquet_generator_exact_with(&scaled, 0.0, &AdaptiveOptions::with_tol(1e-12))
            .unwrap()
            .generator;
        let rem = &(&log - &terms.terms[0].scale(c(eps))) - &terms.terms[1].scale(c(eps * eps));
        rem.scale(c(1.0 / (eps * eps * eps)))
    };
    let (a, b, d) = (cubic(4e-2), cubic(2e-2), cubic(1e-2));
    let extrapolated = (&(&d.scale(c(8.0)) - &b.scale(c(6.0))) + &a).scale(c(1.0 / 3.0));
    let rel = extrapolated.max_abs_diff(&terms.terms[2]) / terms.terms[2].max_abs();
    assert!(rel < 1e-3, "relative error {rel}");
}

#[test]
fn magnus_terms_annihilate_trace() {
    let l = model2_lindbladian(&Model2Params::default()).unwrap();
    let terms = magnus_terms(&l, 0.0, 2, 16).unwrap();
    for term in &terms.terms {
        assert!(term.trace_defect() < 1e-12);
    }
}

#[test]
fn micromotion_is_periodic() {
    let l = model1(2.0);
    let gen = floquet_generator_exact(&l, 0.0).unwrap();
    let period = l.period();
    let first: Vec<f64> = (0..8).map(|k| period * k as f64 / 8.0).collect();
    let second: Vec<f64> = first.iter().map(|t| t + period).collect();
    let a = micromotion_ode(&l, &gen, &first).unwrap();
    let b = micromotion_ode(&l, &gen, &second).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!(x.max_abs_diff(y) < 1e-9);
    }
}

#[test]
fn harmonic_balance_matches_propagated_micromotion() {
    let l = model1(3.0);
    let gen = floquet_generator_exact(&l, 0.0).unwrap();
    let series = lindbladian_fourier(&l, 2, 32).unwrap();
    let k_series = micromotion_fourier(&series, &gen, 8).unwrap();
    let grid: Vec<f64> = (0..32).map(|k| l.period() * k as f64 / 32.0).collect();
    let reference = micromotion_ode(&l, &gen, &grid).unwrap();
    for (t, k) in grid.iter().zip(&reference) {
        assert!(k_series.evaluate(*t).max_abs_diff(k) < 1e-6);
    }
}

/// 𝓚(t) − 1 − (∫₀ᵗ𝓛 − t𝓛_F⁽⁰⁾) should shrink as 1/ω².
#[test]
fn micromotion_first_order_remainder_is_second_order() {
    let remainder = |omega: f64| -> f64 {
        let l = model1(omega);
        let gen = floquet_generator_exact(&l, 0.0).unwrap();
        let l0 = model1_magnus_analytic(&Model1Params::new(1.0, 0.2, omega), 0).unwrap().generator;
        let period = l.period();
        let grid: Vec<f64> = (1..16).map(|k| period * k as f64 / 16.0).collect();
        let ks = micromotion_ode(&l, &gen, &grid).unwrap();
        let (x, w) = floquet_core::linalg::gauss_legendre(32);
        let mut worst: f64 = 0.0;
        for (t, k) in grid.iter().zip(&ks) {
            let mut integral = Superoperator::zero(2);
            for (xi, wi) in x.iter().zip(&w) {
                integral = &integral + &l.at(t * xi).scale(c(wi * t));
            }
            let first = &integral - &l0.scale(c(*t));
            let rem = &(k - &Superoperator::identity(2)) - &first;
            worst = worst.max(rem.max_abs());
        }
        worst
    };
    let ratio = remainder(8.0) / remainder(16.0);
    assert!((ratio - 4.0).abs() < 1.0, "ratio {ratio}");
}

#[test]
fn defect_map_and_factorization() {
    let l = model1(2.0);
    let gen = floquet_generator_exact(&l, 0.0).unwrap();
    let period = l.period();
    let maps = defect_map(&l, &gen, &[0.0, period]).unwrap();
    assert!(maps.maps[0].max_abs_diff(&Superoperator::identity(2)) < 1e-12);
    assert!(maps.maps[1].max_abs_diff(&Superoperator::identity(2)) < 1e-9);
    assert!(factorization_error(&l, &gen, 0.3 * period, 3.7 * period).unwrap() < 1e-8);
}

#[test]
fn zeroth_order_steady_state_is_maximally_mixed() {
    let p = Model1Params::new(1.0, 0.2, 2.0);
    let l0 = model1_magnus_analytic(&p, 0).unwrap().generator;
    let constant = floquet_core::PeriodicLindbladian::constant("l0", l0, p.period()).unwrap();
    let series = lindbladian_fourier(&constant, 0, 8).unwrap();
    let ss = steady_state_block(&series, 0).unwrap();
    let half = DensityMatrix::maximally_mixed(2);
    assert!(max_norm(&(ss.coefficient(0).unwrap() - half.data())) < 1e-12);
}

#[test]
fn steady_state_coefficients_are_consistent() {
    let l = model1(2.0);
    let series = lindbladian_fourier(&l, 2, 64).unwrap();
    let ss = steady_state_block(&series, 10).unwrap();
    assert!(ss.conjugation_asymmetry < 1e-6);
    assert_abs_diff_eq!(ss.coefficient(0).unwrap().trace().re, 1.0, epsilon = 1e-10);
    for m in 1..=10 {
        assert!(ss.coefficient(m).unwrap().trace().norm() < 1e-10);
        let pair = ss.coefficient(-m).unwrap() - ss.coefficient(m).unwrap().adjoint();
        assert!(max_norm(&pair) < 1e-10);
    }
}

#[test]
fn first_order_generator_tracks_exact_stroboscopically() {
    let l = model1(3.0);
    let gen = magnus_generator(&l, 1, 16).unwrap();
    let strobe = stroboscopic_evolve(&gen, &DensityMatrix::excited(), 10).unwrap();
    let grid: Vec<f64> = (0..=10).map(|k| k as f64 * l.period()).collect();
    let exact = evolve_state(&l, &DensityMatrix::excited(), &grid).unwrap();
    for (a, b) in exact.iter().zip(&strobe.states) {
        let za = expectation(&Observable::sigma_z(), a).unwrap();
        let zb = expectation(&Observable::sigma_z(), b).unwrap();
        assert!((za - zb).abs() < 0.01);
    }
}

#[test]
fn steady_state_residual_does_not_grow_with_truncation() {
    let rows = steady_state_convergence(&model1(2.0), &[1, 2, 4, 6, 8, 10]).unwrap();
    assert!(rows[0].insufficient_truncation);
    assert!(rows[1..].iter().all(|r| !r.insufficient_truncation));
    for pair in rows[1..].windows(2) {
        assert!(pair[1].residual <= 1.1 * pair[0].residual + 1e-14);
    }
}

#[test]
fn micromotion_truncation_error_decreases() {
    let l = model1(3.0);
    let gen = floquet_generator_exact(&l, 0.0).unwrap();
    let rows = micromotion_convergence(&l, &gen, &[2, 4, 6, 8], 32).unwrap();
    for pair in rows.windows(2) {
        assert!(pair[1].residual < pair[0].residual);
    }
}

#[test]
fn magnus_quadrature_converges_below_folding_threshold() {
    // ω = 3 folds the principal log; the one-period residual is unaffected.
    let l = model1(3.0);
    let rows = magnus_convergence(&l, 2, &[4, 8, 16, 32]).unwrap();
    for pair in rows[1..].windows(2) {
        assert!(pair[1].difference < pair[0].difference);
    }
    let last = rows.last().unwrap();
    assert!(last.difference < 1e-8, "{}", last.difference);
    let order0 = magnus_convergence(&l, 0, &[32]).unwrap();
    assert!(last.residual < order0[0].residual, "{} vs {}", last.residual, order0[0].residual);
}

#[test]
fn static_field_has_no_micromotion() {
    let table = scaling_study(
        |omega| {
            model2_lindbladian(&Model2Params {
                beta: 0.0,
                omega,
                ..Model2Params::default()
            })
        },
        &DensityMatrix::excited(),
        &[4.0, 8.0, 16.0],
        |_| 20,
        32,
    )
    .unwrap();
    for point in &table.points {
        assert!(*point.amplitude.as_ref().unwrap() < 1e-10);
    }
    assert!(table.fit.is_none());
}

#[test]
fn damping_sweep_deviation_grows() {
    let devs: Vec<f64> = [0.1, 0.2, 0.5, 1.0]
        .iter()
        .map(|&g| {
            let l = model1_lindbladian(&Model1Params::new(1.0, g, 2.0)).unwrap();
            let gen = magnus_generator(&l, 1, 16).unwrap();
            floquet_core::studies::max_stroboscopic_deviation(&l, &gen, &DensityMatrix::excited(), 10).unwrap()
        })
        .collect();
    assert!(devs.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn vectorization_of_identity() {
    let v = vectorize(&pauli::identity());
    let expected = [1.0, 0.0, 0.0, 1.0];
    for (a, b) in v.iter().zip(expected) {
        assert_eq!(*a, c(b));
    }
}

#[test]
fn trace_distance_examples() {
    let e = DensityMatrix::excited();
    let half = DensityMatrix::maximally_mixed(2);
    assert_abs_diff_eq!(trace_norm_distance(e.data(), half.data()), 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(
        floquet_core::state_fidelity(&e, &half).unwrap(),
        0.5f64.sqrt(),
        epsilon = 1e-12
    );
    assert_abs_diff_eq!(trace_distance(&e, &DensityMatrix::ground()).unwrap(), 1.0, epsilon = 1e-15);
}

#[test]
fn analytic_generators_match_quadrature_on_random_grids() {
    let mut rng = StdRng::seed_from_u64(31);
    let mut draw = |lo: f64, hi: f64| -> [f64; 3] { std::array::from_fn(|_| rng.random_range(lo..hi)) };
    let (omega_z, gamma, omega) = (draw(0.5, 1.5), draw(0.05, 0.5), draw(2.0, 8.0));
    for &wz in &omega_z {
        for &g in &gamma {
            for &w in &omega {
                let p = Model1Params::new(wz, g, w);
                let l = model1_lindbladian(&p).unwrap();
                for order in 0..=1 {
                    let quad = magnus_generator(&l, order, 16).unwrap();
                    let analytic = model1_magnus_analytic(&p, order).unwrap();
                    let diff = quad.generator.max_abs_diff(&analytic.generator);
                    assert!(diff < 1e-7, "model 1 {p:?} order {order}: {diff:e}");
                }
            }
        }
    }
    let (theta, phi, beta) = (draw(0.0, 2.0 * PI), draw(0.0, PI), draw(0.0, PI / 2.0));
    for &th in &theta {
        for &ph in &phi {
            for &b in &beta {
                let p = Model2Params {
                    theta: th,
                    phi: ph,
                    beta: b,
                    ..Model2Params::default()
                };
                let l = model2_lindbladian(&p).unwrap();
                for order in 0..=1 {
                    let quad = magnus_generator(&l, order, 16).unwrap();
                    let analytic = model2_magnus_analytic(&p, order).unwrap();
                    let diff = quad.generator.max_abs_diff(&analytic.generator);
                    assert!(diff < 1e-7, "model 2 {p:?} order {order}: {diff:e}");
                }
                assert!(model2_geometry(&p).unwrap().quadrature_mismatch < 1e-9);
            }
        }
    }
}
