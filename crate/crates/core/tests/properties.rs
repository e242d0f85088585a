use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use lsprec::cholfit::{build_design, fit_boundary, fit_interior, flatten_coefficients, unflatten_coefficients};
use lsprec::linalg::psd_sqrt_dense;
use lsprec::lrcov::assemble_sigma_l;
use lsprec::precision::estimate_precision;
use lsprec::procsim::{simulate, true_covariance, true_precision, ModelKind, ModelSpec};
use lsprec::sievebasis::{BasisFamily, BasisSet};
use lsprec::structtest::{p_value, statistic_t1, statistic_t2};
use lsprec::varfit::clamp_positive;
use lsprec::{PrecisionF32, SampleF32};

const MODELS: [ModelKind; 7] = [
    ModelKind::WhiteNoise,
    ModelKind::TvMa1,
    ModelKind::TvMa2,
    ModelKind::TvMa3,
    ModelKind::TvAr1,
    ModelKind::TvAr2,
    ModelKind::StationaryAr1,
];

fn model() -> impl Strategy<Value = ModelSpec> {
    (0..MODELS.len()).prop_map(|i| ModelSpec::new(MODELS[i]))
}

fn family() -> impl Strategy<Value = BasisFamily> {
    prop_oneof![Just(BasisFamily::Fourier), Just(BasisFamily::LegendreShifted), Just(BasisFamily::ChebyshevWeighted)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn simulation_is_deterministic(m in model(), n in 16usize..300, seed in any::<u64>()) {
        let a = simulate::<f64>(&m, n, seed).unwrap();
        let b = simulate::<f64>(&m, n, seed).unwrap();
        prop_assert_eq!(a.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn clamp_is_positive_idempotent_and_monotone(raw in prop::collection::vec(-2.0f64..2.0, 1..40), bump in 0.0f64..1.0) {
        let n = raw.len() + 3;
        let (once, _) = clamp_positive(&raw, n);
        prop_assert!(once.iter().all(|&v| v > 0.0));
        let (twice, again) = clamp_positive(&once, n);
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(again, 0);
        let higher: Vec<f64> = raw.iter().map(|v| v + bump).collect();
        let (up, _) = clamp_positive(&higher, n);
        for (a, b) in once.iter().zip(&up) {
            prop_assert!(b >= a || *a == 1.0 / n as f64);
        }
    }

    #[test]
    fn block_layout_round_trip(b in 1usize..6, c in 1usize..7, seed in any::<u64>()) {
        let a = DMatrix::from_fn(b, c, |j, k| ((seed.wrapping_add((j * 31 + k) as u64) % 1000) as f64) / 7.0);
        let beta = flatten_coefficients(&a);
        for (s, &v) in beta.iter().enumerate() {
            prop_assert_eq!(v, a[(s / c, s % c)]);
        }
        prop_assert_eq!(unflatten_coefficients(&beta, b, c).unwrap(), a);
    }

    #[test]
    fn fit_invariants(m in model(), fam in family(), n in 120usize..400, b in 1usize..4, c in 1usize..5, seed in any::<u64>(), s in 0.1f64..10.0) {
        let sample = simulate::<f64>(&m, n, seed).unwrap();
        let basis = BasisSet::new(fam, c).unwrap();
        let fit = fit_interior(&sample, b, &basis).unwrap();

        let y = build_design(&sample, b, &basis).unwrap();
        let e = DVector::from_column_slice(&fit.residuals);
        let xnorm = sample.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((y.transpose() * e).amax() <= 1e-8 * xnorm * n as f64);

        let quad = basis.quadrature(2048);
        let integral: f64 = (1..=b).map(|j| quad.iter().map(|&(t, w)| w * fit.phi(j, t).unwrap().powi(2)).sum::<f64>()).sum();
        let coef: f64 = fit.coefficients.iter().map(|a| a * a).sum();
        prop_assert!((integral - coef).abs() <= 1e-6 * coef.max(1.0));

        let scaled = fit_interior(&sample.scaled(s), b, &basis).unwrap();
        for (p, q) in fit.coefficients.iter().zip(scaled.coefficients.iter()) {
            prop_assert!((p - q).abs() <= 1e-8 * p.abs().max(1.0));
        }
        for (r, q) in fit.residuals.iter().zip(&scaled.residuals) {
            prop_assert!((r * s - q).abs() <= 1e-8 * s * r.abs().max(1.0));
        }
        let t1 = statistic_t1(&fit);
        prop_assert!((t1 - statistic_t1(&scaled)).abs() <= 1e-8 * t1.max(1e-12));
        let bd = fit_boundary(&sample, b, &basis).unwrap();
        let bs = fit_boundary(&sample.scaled(s), b, &basis).unwrap();
        for (p, q) in bd.rows.iter().zip(&bs.rows) {
            for (u, v) in p.at_row.iter().zip(&q.at_row) {
                prop_assert!((u - v).abs() <= 1e-8 * u.abs().max(1.0));
            }
        }
    }

    #[test]
    fn t2_is_non_increasing_in_k0(m in model(), seed in any::<u64>(), b in 2usize..6) {
        let sample = simulate::<f64>(&m, 300, seed).unwrap();
        let fit = fit_interior(&sample, b, &BasisSet::fourier(3)).unwrap();
        let values: Vec<f64> = (0..b).map(|k0| statistic_t2(&fit, k0).unwrap()).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn p_value_is_bounded_and_monotone(draws in prop::collection::vec(0.0f64..5.0, 1..200), t in 0.0f64..6.0, d in 0.0f64..1.0) {
        let p = p_value(t, &draws);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(p_value(t + d, &draws) <= p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn precision_invariants(m in model(), n in 30usize..128, b in 1usize..4, c in 1usize..4, seed in any::<u64>(), s in 0.2f64..5.0) {
        let sample = simulate::<f64>(&m, n, seed).unwrap();
        let basis = BasisSet::fourier(c);
        let pf = estimate_precision(&sample, b, &basis).unwrap();
        let est = &pf.estimate;

        let phi = est.cholesky_factor_dense();
        for i in 0..n {
            prop_assert_eq!(phi[(i, i)], 1.0);
            for j in 0..i.saturating_sub(b) {
                prop_assert_eq!(phi[(i, j)], 0.0);
            }
        }
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(&est.dinv));
        let product = phi.transpose() * d * &phi;
        let dense = est.to_dense().unwrap();
        prop_assert!((&dense - &product).amax() <= 1e-12 * product.amax());

        let mut state = seed;
        for _ in 0..50 {
            let v: Vec<f64> = (0..n).map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            }).collect();
            prop_assert!(est.quadratic_form(&v).unwrap() > 0.0);
        }

        let scaled = estimate_precision(&sample.scaled(s), b, &basis).unwrap();
        if pf.variances.clamped == 0 && scaled.variances.clamped == 0 {
            for (a, q) in est.dinv.iter().zip(&scaled.estimate.dinv) {
                prop_assert!((q * s * s - a).abs() <= 1e-8 * a);
            }
            let phi_s = scaled.estimate.cholesky_factor_dense();
            prop_assert!((&phi - &phi_s).amax() <= 1e-8 * phi.amax());
        }
    }

    #[test]
    fn sigma_l_scales_with_fourth_power(seed in any::<u64>(), s in 0.3f64..3.0) {
        let sample = simulate::<f64>(&ModelSpec::new(ModelKind::TvAr1), 200, seed).unwrap();
        let basis = BasisSet::fourier(3);
        let fit = fit_interior(&sample, 2, &basis).unwrap();
        let fit_s = fit_interior(&sample.scaled(s), 2, &basis).unwrap();
        let a = assemble_sigma_l(&sample, &fit, 0.25).unwrap().to_dense();
        let b = assemble_sigma_l(&sample.scaled(s), &fit_s, 0.25).unwrap().to_dense();
        prop_assert!((a * s.powi(4) - &b).amax() <= 1e-9 * b.amax());
    }

    #[test]
    fn psd_square_root_reconstructs_psd_input(k in 1usize..12, seed in any::<u64>()) {
        let g = DMatrix::from_fn(k, k + 2, |i, j| (((seed ^ ((i * 97 + j * 13) as u64)).wrapping_mul(2654435761) % 2001) as f64 / 1000.0) - 1.0);
        let a = &g * g.transpose();
        let (f, _) = psd_sqrt_dense(&a).unwrap();
        prop_assert!((&f * f.transpose() - &a).amax() <= 1e-10 * a.amax().max(1.0));
    }
}

#[test]
fn oracles_are_consistent() {
    for kind in MODELS {
        let m = ModelSpec::new(kind);
        let gamma = true_covariance::<f64>(&m, 60).unwrap();
        assert_eq!(gamma, gamma.transpose());
        let omega = true_precision::<f64>(&m, 60).unwrap();
        let eye = &gamma * &omega;
        assert!((eye - DMatrix::identity(60, 60)).amax() < 1e-8, "{kind:?}");
    }
    let sd = 1.7;
    let omega = true_precision::<f64>(&ModelSpec::new(ModelKind::WhiteNoise).with_sd(sd), 10).unwrap();
    assert_eq!(omega, DMatrix::identity(10, 10) / (sd * sd));
}

#[test]
fn ma_oracle_matches_monte_carlo() {
    let (n, reps) = (16, 100_000);
    let m = ModelSpec::new(ModelKind::TvMa2);
    let gamma = true_covariance::<f64>(&m, n).unwrap();
    let mut sum = DMatrix::<f64>::zeros(n, n);
    let mut sq = DMatrix::<f64>::zeros(n, n);
    for r in 0..reps {
        let x = DVector::from_vec(simulate::<f64>(&m, n, r as u64).unwrap().values);
        let outer = &x * x.transpose();
        sq += outer.component_mul(&outer);
        sum += outer;
    }
    let mean = &sum / reps as f64;
    let var = &sq / reps as f64 - mean.component_mul(&mean);
    let outside = (0..n * n).filter(|&k| (mean[k] - gamma[k]).abs() > 4.0 * (var[k] / reps as f64).sqrt()).count();
    assert!(outside <= 2, "{outside} entries outside four standard errors");
}

#[test]
fn single_precision_pipeline_tracks_double() {
    let s64 = simulate::<f64>(&ModelSpec::new(ModelKind::TvAr1), 400, 21).unwrap();
    let s32 = SampleF32::from_values(s64.values.iter().map(|&v| v as f32).collect());
    let e32: PrecisionF32 = estimate_precision(&s32, 2, &BasisSet::fourier(3)).unwrap().estimate;
    let e64 = estimate_precision(&s64, 2, &BasisSet::fourier(3)).unwrap().estimate;
    for (a, b) in e32.dinv.iter().zip(&e64.dinv) {
        assert!((*a as f64 - b).abs() <= 1e-3 * b.abs().max(1.0));
    }
}
