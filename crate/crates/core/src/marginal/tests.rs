use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::*;
use crate::data_model::{build_cache, Center, DesignMatrix, ModelId};
use crate::error::Error;
use crate::families::{self, Family};
use crate::priors::{group_blocks, InvGamma, ParamPriorSpec, PriorKind};
use crate::sim::{simulate, SimDesign};

fn normal_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
}

fn gaussian_data(rng: &mut ChaCha8Rng, n: usize, sizes: &[usize], signal: f64, noise: f64) -> (Arc<DesignMatrix>, DVector<f64>) {
    let p: usize = sizes.iter().sum();
    let z = normal_matrix(rng, n, p);
    let beta = DVector::from_fn(p, |_, _| signal * rng.sample::<f64, _>(StandardNormal));
    let y = &z * beta + DVector::from_fn(n, |_, _| noise * rng.sample::<f64, _>(StandardNormal));
    (Arc::new(DesignMatrix::new(z, sizes).unwrap()), y)
}

const LN_2PI_TEST: f64 = 1.8378770664093453;

fn full(sizes: &[usize]) -> ModelId {
    ModelId::from_bits(&vec![true; sizes.len()], sizes)
}

/// Log density of `y ~ N(0, V)` through an `n × n` Cholesky factor.
fn mvn_log_density(y: &DVector<f64>, v: &DMatrix<f64>) -> f64 {
    let n = y.len() as f64;
    let c = v.clone().cholesky().unwrap();
    let ld = 2.0 * c.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    -0.5 * n * (2.0 * std::f64::consts::PI).ln() - 0.5 * ld - 0.5 * y.dot(&c.solve(y))
}

/// Marginal covariance `φ(I + Z Σ_β Zᵀ)` of `y` under the group-Zellner prior.
fn zellner_marginal_cov(z: &DMatrix<f64>, sizes: &[usize], phi: f64, g: f64) -> DMatrix<f64> {
    let n = z.nrows();
    let p = z.ncols();
    let mut cov_b = DMatrix::zeros(p, p);
    let mut start = 0;
    for &s in sizes {
        let zj = z.columns(start, s);
        let gj = (zj.transpose() * zj).try_inverse().unwrap();
        cov_b.view_mut((start, start), (s, s)).copy_from(&(gj * (g * n as f64 / s as f64)));
        start += s;
    }
    (DMatrix::identity(n, n) + z * cov_b * z.transpose()) * phi
}

#[test]
fn gaussian_known_phi_all_routes_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for rep in 0..10 {
        let sizes = [1, 2, 1];
        let phi = 0.5 + rep as f64 * 0.2;
        let g = 0.5 + rep as f64;
        let (design, y) = gaussian_data(&mut rng, 40, &sizes, 0.5, phi.sqrt());
        let family = Family::GaussianKnownPhi(phi);
        let model = full(&sizes);
        let oracle = mvn_log_density(&y, &zellner_marginal_cov(design.values(), &sizes, phi, g));
        let prior = ParamPriorSpec::group_zellner(g);
        let cache = Arc::new(build_cache(design.clone(), &y, &family, Center::Zero).unwrap());
        let exact = exact_gaussian_marginal(&model, &cache, &prior, Dispersion::Known(phi)).unwrap().log_ml;
        let settings = AlaSettings { variant: ExpansionVariant::LogJoint, curvature: false };
        let cached = CachedAla::new(cache.clone(), family, prior, settings).unwrap().score(&model).unwrap().log_ml;
        let problem = ModelProblem::new(design, Response::Glm(y), family, prior).unwrap();
        let la = problem.la(&model).unwrap().log_ml;
        let general = problem.ala(&model, ExpansionVariant::LogJoint).unwrap().log_ml;
        for (name, v) in [("exact", exact), ("cached", cached), ("la", la), ("general", general)] {
            assert!((v - oracle).abs() <= 1e-8 * oracle.abs(), "{name}: {v} vs {oracle}");
        }
    }
}

#[test]
fn null_model_exact_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (design, y) = gaussian_data(&mut rng, 25, &[1, 1], 1.0, 1.0);
    let cache = build_cache(design, &y, &Family::GaussianKnownPhi(1.0), Center::Zero).unwrap();
    let v = exact_gaussian_marginal(&ModelId::empty(2), &cache, &ParamPriorSpec::group_zellner(1.0), Dispersion::Known(1.0))
        .unwrap()
        .log_ml;
    let want = -12.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * y.dot(&y);
    assert!((v - want).abs() < 1e-10);
}

#[test]
fn exact_matches_trapezoid_grid_in_two_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sizes = [1, 1];
    let (design, y) = gaussian_data(&mut rng, 30, &sizes, 0.4, 1.0);
    let cache = build_cache(design.clone(), &y, &Family::GaussianKnownPhi(1.0), Center::Zero).unwrap();
    let prior = ParamPriorSpec::group_zellner(1.0);
    let model = full(&sizes);
    let exact = exact_gaussian_marginal(&model, &cache, &prior, Dispersion::Known(1.0)).unwrap();
    let z = design.values();
    let blocks = group_blocks(&(z.transpose() * z), &sizes, &model).unwrap();
    let integrand = |b: &DVector<f64>| {
        families::loglik(&Family::GaussianKnownPhi(1.0), &(z * b), &y, 1.0).value
            + crate::priors::log_normal_blocks(b, 1.0, &blocks, PriorKind::GroupZellner, 30, 1.0)
    };
    let (m, h) = (exact.mode.clone(), 0.004);
    let mut vals = Vec::new();
    for i in -400..=400 {
        for j in -400..=400 {
            let b = DVector::from_vec(vec![m[0] + i as f64 * h, m[1] + j as f64 * h]);
            vals.push(integrand(&b));
        }
    }
    let mx = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let grid = mx + (vals.iter().map(|v| (v - mx).exp()).sum::<f64>() * h * h).ln();
    assert!((grid - exact.log_ml).abs() < 1e-4, "{grid} vs {}", exact.log_ml);
}

#[test]
fn normal_inverse_gamma_matches_quadrature_over_phi() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sizes = [2, 1];
    let (design, y) = gaussian_data(&mut rng, 35, &sizes, 0.5, 1.3);
    let cache = build_cache(design, &y, &Family::GaussianKnownPhi(1.0), Center::Zero).unwrap();
    let ig = InvGamma::new(1.5, 2.0).unwrap();
    let prior = ParamPriorSpec::group_zellner(2.0);
    let model = full(&sizes);
    let nig = exact_gaussian_marginal(&model, &cache, &prior, Dispersion::InvGamma(ig)).unwrap().log_ml;
    // integrate the known-φ marginal against the IG density in u = log φ
    let f = |u: f64| {
        let phi = u.exp();
        exact_gaussian_marginal(&model, &cache, &prior, Dispersion::Known(phi)).unwrap().log_ml + ig.log_pdf(phi) + u
    };
    let q = log_integrate_1d(&f, 0.5, 0.3, QuadOptions::default()).unwrap();
    assert!((q.log_value - nig).abs() < 1e-7, "{} vs {nig}", q.log_value);
}

#[test]
fn gmom_exact_matches_quadrature_single_coefficient() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (design, y) = gaussian_data(&mut rng, 30, &[1], 0.3, 1.0);
    let cache = build_cache(design.clone(), &y, &Family::GaussianKnownPhi(1.0), Center::Zero).unwrap();
    let prior = ParamPriorSpec::gmom(1.0);
    let model = full(&[1]);
    let exact = exact_gaussian_marginal(&model, &cache, &prior, Dispersion::Known(1.0)).unwrap().log_ml;
    let z = design.values().clone();
    let blocks = group_blocks(&(z.transpose() * &z), &[1], &model).unwrap();
    let dens = ParamDensity::new(&blocks, PriorKind::GMom, 30, 1.0, Scale::Known(1.0), true);
    let f = |b: f64| {
        let v = DVector::from_element(1, b);
        families::loglik(&Family::GaussianKnownPhi(1.0), &(&z * &v), &y, 1.0).value + dens.log_density(&v)
    };
    let sd = 1.0 / z.norm();
    let q = log_integrate_1d(&f, 0.0, sd, QuadOptions::default()).unwrap();
    assert!((q.log_value - exact).abs() < 1e-7 * exact.abs(), "{} vs {exact}", q.log_value);
}

#[test]
fn la_equals_log_joint_ala_at_the_mode() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let d = simulate(SimDesign::LogisticTrend { p: 4 }, 150, &mut rng).unwrap();
    let problem = ModelProblem::new(d.design.clone(), d.response.clone(), d.family, ParamPriorSpec::group_zellner(1.0)).unwrap();
    let model = full(&[1; 4]);
    let la = problem.la(&model).unwrap();
    let at_mode = problem.ala_at(&model, &la.mode, ExpansionVariant::LogJoint).unwrap();
    assert!((la.log_ml - at_mode.log_ml).abs() < 1e-10);
}

#[test]
fn cached_and_general_routes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for design in [SimDesign::LogisticTrend { p: 5 }, SimDesign::PoissonTrend { p: 5 }] {
        let d = simulate(design, 120, &mut rng).unwrap();
        let Response::Glm(y) = &d.response else { unreachable!() };
        for prior in [ParamPriorSpec::group_zellner(1.0), ParamPriorSpec::gmom(1.0)] {
            let cache = Arc::new(build_cache(d.design.clone(), y, &d.family, Center::Zero).unwrap());
            for variant in [ExpansionVariant::Likelihood, ExpansionVariant::LogJoint] {
                let cached = CachedAla::new(cache.clone(), d.family, prior, AlaSettings { variant, curvature: false }).unwrap();
                let problem = ModelProblem::new(d.design.clone(), d.response.clone(), d.family, prior).unwrap();
                for bits in ["10100", "01011", "11111"] {
                    let m = ModelId::parse(bits, &[1; 5]).unwrap();
                    let a = cached.score(&m).unwrap().log_ml;
                    let b = problem.ala(&m, variant).unwrap().log_ml;
                    assert!((a - b).abs() < 1e-9 * b.abs(), "{design:?} {variant:?} {bits}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn unknown_dispersion_cached_matches_dense_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let prior = ParamPriorSpec::group_zellner(1.0).with_phi_prior(InvGamma::new(0.5, 0.5).unwrap());
    let mut checked = 0;
    for _ in 0..20 {
        let sizes = [1, 2];
        let (design, y) = gaussian_data(&mut rng, 60, &sizes, 0.08, 1.0);
        let family = Family::GaussianUnknownPhi;
        let cache = Arc::new(build_cache(design.clone(), &y, &family, Center::Zero).unwrap());
        let cached = CachedAla::new(cache, family, prior, AlaSettings::default()).unwrap();
        let model = full(&sizes);
        let Ok(score) = cached.score(&model) else { continue };
        let phi0 = cached.phi0().unwrap();
        let z = design.values();
        let (g, h) = families::grad_hess(&family, &DVector::zeros(3), phi0, z, &y).unwrap();
        let hf = h.clone().cholesky().unwrap();
        let step = hf.solve(&g);
        let dense = g.dot(&step);
        let u = z.transpose() * &y;
        let ls = (z.transpose() * z).cholesky().unwrap().solve(&u);
        let q = u.dot(&ls);
        let t = 1.0 + q / (phi0 * phi0 * cached.s_phi0() - q);
        assert!((dense - t * q / phi0).abs() < 1e-10 * dense.abs());
        // dense (p+1)-dimensional expansion; the closed form places the prior at the
        // least-squares β̃, the general route at the full Newton step
        let phi_t = phi0 - step[3];
        let ld = 2.0 * hf.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let base = families::loglik(&family, &DVector::zeros(60), &y, phi0).value + 2.0 * LN_2PI_TEST - 0.5 * ld + 0.5 * dense;
        let blocks = group_blocks(&(z.transpose() * z), &sizes, &model).unwrap();
        let log_prior = |b: &DVector<f64>| {
            crate::priors::log_normal_blocks(b, phi_t, &blocks, PriorKind::GroupZellner, 60, 1.0) + InvGamma::new(0.5, 0.5).unwrap().log_pdf(phi_t)
        };
        let closed = base + log_prior(&ls);
        assert!((score.log_ml - closed).abs() < 1e-9 * closed.abs(), "{} vs {closed}", score.log_ml);
        let newton = -step.rows(0, 3).into_owned();
        assert!((score.mode.rows(0, 3) - &newton).norm() < 1e-10);
        assert!((score.mode[3] - phi_t).abs() < 1e-12);
        let problem = ModelProblem::new(design.clone(), Response::Glm(y.clone()), family, prior).unwrap();
        let general = problem.ala(&model, ExpansionVariant::Likelihood).unwrap();
        let want = base + log_prior(&newton);
        assert!((general.log_ml - want).abs() < 1e-9 * want.abs(), "{} vs {want}", general.log_ml);
        checked += 1;
    }
    assert!(checked >= 15);
}

#[test]
fn phi_tilde_positive_on_weak_signal_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let prior = ParamPriorSpec::group_zellner(1.0).with_phi_prior(InvGamma::default());
    for _ in 0..50 {
        let sizes = [1, 1, 1];
        let (design, y) = gaussian_data(&mut rng, 80, &sizes, 0.1, 1.0);
        let cache = Arc::new(build_cache(design, &y, &Family::GaussianUnknownPhi, Center::Zero).unwrap());
        let s = CachedAla::new(cache, Family::GaussianUnknownPhi, prior, AlaSettings::default())
            .unwrap()
            .score(&full(&sizes))
            .unwrap();
        assert!(s.mode[3] > 0.0);
    }
}

#[test]
fn strong_gaussian_signal_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let prior = ParamPriorSpec::group_zellner(1.0).with_phi_prior(InvGamma::default());
    let (design, y) = gaussian_data(&mut rng, 80, &[1], 3.0, 0.1);
    let cache = Arc::new(build_cache(design, &y, &Family::GaussianUnknownPhi, Center::Zero).unwrap());
    let ala = CachedAla::new(cache, Family::GaussianUnknownPhi, prior, AlaSettings::default()).unwrap();
    assert!(matches!(ala.score(&full(&[1])), Err(Error::NotConcaveAtExpansion)));
}

#[test]
fn unknown_dispersion_needs_a_phi_prior() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (design, y) = gaussian_data(&mut rng, 20, &[1], 0.1, 1.0);
    let cache = Arc::new(build_cache(design, &y, &Family::GaussianUnknownPhi, Center::Zero).unwrap());
    let r = CachedAla::new(cache, Family::GaussianUnknownPhi, ParamPriorSpec::group_zellner(1.0), AlaSettings::default());
    assert!(matches!(r, Err(Error::Domain(_))));
}

#[test]
fn curvature_context_values() {
    let y = DVector::from_vec(vec![0.0, 1.0, 1.0, 0.0]);
    let c = curvature_context(&Family::Logistic, &y).unwrap();
    assert!((c.rho_hat - 4.0 / 3.0).abs() < 1e-14);
    assert_eq!(c.bpp_nu0, 0.25);
    let y = DVector::from_vec(vec![0.0, 2.0, 3.0, 1.0, 4.0]);
    let c = curvature_context(&Family::Poisson, &y).unwrap();
    assert!((c.bpp_nu0 - 2.0).abs() < 1e-12);
    let y = DVector::from_vec(vec![0.3, -1.0, 2.0, 0.5]);
    let a = curvature_context(&Family::GaussianKnownPhi(1.0), &y).unwrap().rho_hat;
    let b = curvature_context(&Family::GaussianKnownPhi(1.0), &(&y * 2.0)).unwrap().rho_hat;
    assert!(b > a);
    assert!(matches!(
        curvature_context(&Family::Logistic, &DVector::from_element(4, 1.0)),
        Err(Error::DegenerateResponse(_))
    ));
}

#[test]
fn bayes_factors_are_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let d = simulate(SimDesign::LogisticTrend { p: 4 }, 200, &mut rng).unwrap();
    let Response::Glm(y) = &d.response else { unreachable!() };
    let cache = Arc::new(build_cache(d.design.clone(), y, &d.family, Center::InterceptMle).unwrap());
    let ala = CachedAla::new(cache, d.family, ParamPriorSpec::group_zellner(1.0), AlaSettings { curvature: true, ..Default::default() })
        .unwrap();
    let m: Vec<ModelId> = ["1000", "0011", "1111"].iter().map(|b| ModelId::parse(b, &[1; 4]).unwrap()).collect();
    assert_eq!(ala.log_bf(&m[0], &m[0]).unwrap(), 0.0);
    let lhs = ala.log_bf(&m[0], &m[2]).unwrap();
    let rhs = ala.log_bf(&m[0], &m[1]).unwrap() + ala.log_bf(&m[1], &m[2]).unwrap();
    assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    assert_eq!(ala.score(&m[1]).unwrap().diagnostics.rho_hat, ala.curvature().map(|c| c.rho_hat));
}

#[test]
fn refined_expansion_limits() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let d = simulate(SimDesign::LogisticTrend { p: 3 }, 200, &mut rng).unwrap();
    let Response::Glm(y) = &d.response else { unreachable!() };
    let prior = ParamPriorSpec::group_zellner(1.0);
    let problem = ModelProblem::new(d.design.clone(), d.response.clone(), d.family, prior).unwrap();
    let cache = Arc::new(build_cache(d.design.clone(), y, &d.family, Center::Zero).unwrap());
    let cached = CachedAla::new(cache, d.family, prior, AlaSettings::default()).unwrap();
    let model = full(&[1; 3]);
    let k0 = problem.ala_refined(&model, 0, ExpansionVariant::Likelihood).unwrap().log_ml;
    assert!((k0 - cached.score(&model).unwrap().log_ml).abs() < 1e-10 * k0.abs());
    let la = problem.la(&model).unwrap().log_ml;
    let k50 = problem.ala_refined(&model, 50, ExpansionVariant::LogJoint).unwrap().log_ml;
    assert!((k50 - la).abs() < 1e-8 * la.abs());
}

#[test]
fn gmom_penalizes_spurious_groups_on_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let mut diff = 0.0;
    for _ in 0..50 {
        let n = 100;
        let z = normal_matrix(&mut rng, n, 2);
        let y = z.column(0) * 1.0 + DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let design = Arc::new(DesignMatrix::singletons(z));
        let cache = Arc::new(build_cache(design, &y, &Family::GaussianKnownPhi(1.0), Center::Zero).unwrap());
        let model = full(&[1, 1]);
        let local = CachedAla::new(cache.clone(), Family::GaussianKnownPhi(1.0), ParamPriorSpec::group_zellner(1.0), AlaSettings::default())
            .unwrap()
            .score(&model)
            .unwrap()
            .log_ml;
        let nonlocal = CachedAla::new(cache, Family::GaussianKnownPhi(1.0), ParamPriorSpec::gmom(1.0), AlaSettings::default())
            .unwrap()
            .score(&model)
            .unwrap()
            .log_ml;
        diff += nonlocal - local;
    }
    assert!(diff / 50.0 < 0.0);
}

#[test]
fn param_density_derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let z = normal_matrix(&mut rng, 30, 3);
    let sizes = [1, 2];
    let model = full(&sizes);
    let blocks = group_blocks(&(z.transpose() * &z), &sizes, &model).unwrap();
    let ig = InvGamma::new(2.0, 1.5).unwrap();
    let cases = [
        (PriorKind::GroupZellner, Scale::Known(1.3), false, 3),
        (PriorKind::GMom, Scale::Known(0.7), true, 3),
        (PriorKind::GroupZellner, Scale::Dispersion(ig), false, 4),
        (PriorKind::GMom, Scale::Dispersion(ig), true, 4),
        (PriorKind::GroupZellner, Scale::Precision(ig), false, 4),
    ];
    for (kind, scale, pen, d) in cases {
        let dens = ParamDensity::new(&blocks, kind, 30, 1.0, scale, pen);
        let mut eta = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal) * 0.5);
        if d == 4 {
            eta[3] = 0.8;
        }
        let (g, h) = dens.neg_grad_hess(&eta).unwrap();
        let step = 1e-5;
        for k in 0..d {
            let mut up = eta.clone();
            up[k] += step;
            let mut dn = eta.clone();
            dn[k] -= step;
            let fd = -(dens.log_density(&up) - dens.log_density(&dn)) / (2.0 * step);
            assert!((fd - g[k]).abs() < 1e-6 * (1.0 + g[k].abs()), "{kind:?} {scale:?} grad {k}");
            let (gu, _) = dens.neg_grad_hess(&up).unwrap();
            let (gd, _) = dens.neg_grad_hess(&dn).unwrap();
            let col = (gu - gd) / (2.0 * step);
            for r in 0..d {
                assert!((col[r] - h[(r, k)]).abs() < 1e-5 * (1.0 + h[(r, k)].abs()), "{kind:?} {scale:?} hess {r},{k}");
            }
        }
    }
}

#[test]
fn aft_scores_and_concavity_precheck() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let d = simulate(SimDesign::AftScenario1 { covariates: 2 }, 150, &mut rng).unwrap();
    let prior = ParamPriorSpec::group_zellner(1.0).with_phi_prior(InvGamma::default());
    let problem = ModelProblem::new(d.design.clone(), d.response.clone(), d.family, prior).unwrap();
    let sizes = d.design.group_sizes();
    let model = ModelId::from_active(5, &[0, 1], &sizes);
    let ala = problem.ala(&model, ExpansionVariant::Likelihood).unwrap();
    let la = problem.la(&model).unwrap();
    assert!(ala.log_ml.is_finite() && la.log_ml.is_finite());
    assert!(la.mode[2] > 0.0);
    // a handful of events cannot identify the full spline model
    let Response::Survival(s) = &d.response else { unreachable!() };
    let mut few = s.clone();
    let mut kept = 0;
    for st in few.status.iter_mut() {
        if *st {
            kept += 1;
            if kept > 4 {
                *st = false;
            }
        }
    }
    let sparse = ModelProblem::new(d.design.clone(), Response::Survival(few), d.family, prior).unwrap();
    let big = ModelId::from_active(5, &[0, 1, 2, 3, 4], &sizes);
    assert!(matches!(sparse.ala(&big, ExpansionVariant::Likelihood), Err(Error::NotConcaveAtExpansion)));
}

#[test]
fn quadrature_logistic_marginal_agrees_with_laplace_roughly() {
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    let d = simulate(SimDesign::LogisticSingle { beta: 0.405 }, 100, &mut rng).unwrap();
    let Response::Glm(y) = &d.response else { unreachable!() };
    let z = d.design.values().clone();
    let lik = GlmLikelihood { family: Family::Logistic, z, y: y.clone(), phi: 1.0 };
    let prior = NormalPrior::standard(1);
    let la = la_marginal(&lik, &prior, &DVector::zeros(1)).unwrap();
    let f = |b: f64| {
        let v = DVector::from_element(1, b);
        lik.loglik(&v).unwrap() + prior.log_density(&v)
    };
    let q = log_integrate_1d(&f, la.mode[0], 0.2, QuadOptions::default()).unwrap();
    assert!(((la.log_ml - q.log_value) / q.log_value).abs() < 0.05);
}
