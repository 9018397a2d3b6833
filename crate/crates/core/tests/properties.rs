use monoblock::blocksolve::{inverse_positivity_check, solve_tridiag, TriDiag};
use monoblock::discretization::{assemble_level, residual_norm};
use monoblock::init_solutions::build_bracket;
use monoblock::mesh::Field;
use monoblock::models::{BelousovZhabotinskiiParams, GasLiquidParams, LinearCoupledParams, Model, VolterraLotkaParams};
use monoblock::monotone::{march, SweepVariant, TimeStepPolicy};
use monoblock::oracle::{dense_solve, ManufacturedCase};
use monoblock::reaction::{audit_problem, c_level, gamma, lambda_shift, QuasiMonotoneClass};
use monoblock::Mesh;
use proptest::prelude::*;

fn dominant(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-1.0..1.0f64, n - 1),
        prop::collection::vec(-1.0..1.0f64, n - 1),
        prop::collection::vec(0.1..2.0f64, n),
        prop::collection::vec(-10.0..10.0f64, n),
    )
}

fn build(sub: &[f64], sup: &[f64], extra: &[f64]) -> TriDiag<f64> {
    let n = extra.len();
    let diag = (0..n)
        .map(|k| {
            let l = if k > 0 { sub[k - 1].abs() } else { 0.0 };
            let r = if k + 1 < n { sup[k].abs() } else { 0.0 };
            l + r + extra[k]
        })
        .collect();
    TriDiag::new(sub.to_vec(), diag, sup.to_vec()).unwrap()
}

fn with_velocity(mut m: Model<f64>, v: [[f64; 2]; 2]) -> Model<f64> {
    match &mut m {
        Model::GasLiquid(p) => p.transport.velocity = v,
        Model::BelousovZhabotinskii(p) => p.transport.velocity = v,
        Model::EnzymeSubstrate(p) => p.transport.velocity = v,
        Model::LinearCoupled(p) => p.transport.velocity = v,
        Model::VolterraLotka(p) => p.velocity = v,
        Model::Zero(_) => {}
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn thomas_matches_dense((sub, sup, extra, rhs) in (2usize..40).prop_flat_map(dominant)) {
        let sys = build(&sub, &sup, &extra);
        let x = solve_tridiag(&sys, &rhs).unwrap();
        let n = rhs.len();
        let mut dense = vec![0.0; n * n];
        for k in 0..n {
            dense[k * n + k] = sys.diag[k];
            if k > 0 { dense[k * n + k - 1] = sys.sub[k - 1]; }
            if k + 1 < n { dense[k * n + k + 1] = sys.sup[k]; }
        }
        let y = dense_solve(&dense, &rhs).unwrap();
        let scale = 1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in x.iter().zip(&y) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
        let back = sys.mul_vec(&x);
        for (a, b) in back.iter().zip(&rhs) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn m_matrix_inverse_is_nonnegative((sub, sup, extra, _rhs) in (2usize..30).prop_flat_map(dominant)) {
        let neg = |v: &Vec<f64>| v.iter().map(|x| -x.abs()).collect::<Vec<_>>();
        let sys = build(&neg(&sub), &neg(&sup), &extra);
        prop_assert!(inverse_positivity_check(&sys, 4));
    }

    #[test]
    fn bundled_models_pass_audit(seed in any::<u64>()) {
        let mesh = Mesh::new(1.0, 1.0, 1.0, 4, 4, 3).unwrap();
        for model in Model::<f64>::bundled() {
            let p = model.instantiate().unwrap();
            let audit = audit_problem(&p, &mesh, seed, 40).unwrap();
            prop_assert!(audit.passed(), "{}: {:?}", model.name(), audit);
        }
    }

    #[test]
    fn gamma_is_monotone_in_the_sector(s in prop::array::uniform4(0.0..1.0f64), w in prop::array::uniform4(0.0..1.0f64), m in 1usize..=3) {
        let mesh = Mesh::new(1.0, 1.0, 1.0, 4, 4, 3).unwrap();
        let (x, y, t) = (s[2], s[3], mesh.t(m));
        for model in Model::<f64>::bundled() {
            let p = model.instantiate().unwrap();
            let c = c_level(&p, &mesh, m).unwrap();
            let (lo, hi) = (p.sector.as_ref().unwrap())(x, y, t);
            let at = |r: f64, a: usize| lo[a] + r * (hi[a] - lo[a]);
            let (u1, v1) = (at(s[0].min(w[0]), 0), at(s[0].max(w[0]), 0));
            let (u2, v2) = (at(s[1].min(w[1]), 1), at(s[1].max(w[1]), 1));
            let (small, big) = match p.class {
                QuasiMonotoneClass::Nondecreasing => ([[u1, u2], [u1, u2]], [[v1, v2], [v1, v2]]),
                QuasiMonotoneClass::Nonincreasing => ([[u1, v2], [v1, u2]], [[v1, u2], [u1, v2]]),
            };
            for a in 0..2 {
                let lo_g = gamma(&p, c, x, y, t, small[a]).unwrap()[a];
                let hi_g = gamma(&p, c, x, y, t, big[a]).unwrap()[a];
                prop_assert!(lo_g <= hi_g + 1e-12, "{} component {a}: {lo_g} > {hi_g}", model.name());
            }
        }
    }

    #[test]
    fn lambda_shift_matches_substitution(lambda in 0.0..3.0f64, z in prop::array::uniform2(0.0..1.0f64), t in 0.0..1.0f64) {
        let p = Model::<f64>::BelousovZhabotinskii(Default::default()).instantiate().unwrap();
        let q = lambda_shift(&p, lambda);
        let e = (lambda * t).exp();
        let u = [e * z[0], e * z[1]];
        for a in 0..2 {
            let want = lambda * z[a] + p.f(a, 0.3, 0.4, t, u) / e;
            prop_assert!((q.f(a, 0.3, 0.4, t, z) - want).abs() <= 1e-12 * (1.0 + want.abs()));
            prop_assert!((q.df_own(a, 0.3, 0.4, t, z) - lambda - p.df_own(a, 0.3, 0.4, t, u)).abs() <= 1e-12);
            prop_assert!((q.g(a, 0.2, 0.0, t) * e - p.g(a, 0.2, 0.0, t)).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn sandwich_holds_for_random_problems(
        kind in 0usize..4,
        v in prop::array::uniform4(-2.0..2.0f64),
        nx in 3usize..7,
        ny in 3usize..7,
        nt in 1usize..4,
        k in 0.5..3.0f64,
        gauss_seidel in any::<bool>(),
    ) {
        let vel = [[v[0], v[1]], [v[2], v[3]]];
        let model = match kind {
            0 => Model::GasLiquid(GasLiquidParams { sigma: [k, 1.0], ..Default::default() }),
            1 => Model::VolterraLotka(VolterraLotkaParams { a: [0.5 * k, 0.5], ..Default::default() }),
            2 => Model::BelousovZhabotinskii(BelousovZhabotinskiiParams { a: k, ..Default::default() }),
            _ => Model::LinearCoupled(LinearCoupledParams { kappa: [k, k], mu: [0.4 * k, 0.2 * k], ..Default::default() }),
        };
        let model = with_velocity(model, vel);
        let mesh = Mesh::new(1.0, 1.0, 1.0, nx, ny, nt).unwrap();
        let p = model.instantiate().unwrap();
        let bracket = build_bracket(&p, &mesh, &model.default_bracket(&mesh).unwrap()).unwrap();
        let variant = if gauss_seidel { SweepVariant::GaussSeidel } else { SweepVariant::Jacobi };
        let r = march(&p, &mesh, variant, &TimeStepPolicy::default(), &bracket).unwrap();
        prop_assert_eq!(r.report.monotonicity_violations, 0);
        prop_assert_eq!(r.report.structure_failures, 0);
        for m in 0..=nt {
            for a in 0..2 {
                let gap = r.upper[m][a].zip_map(&r.lower[m][a], |u, l| u - l);
                prop_assert!(gap.min_value() >= -1e-10);
            }
        }
    }

    #[test]
    fn assembled_lines_are_m_matrices(v in prop::array::uniform4(-5.0..5.0f64), n in 3usize..9) {
        let model = with_velocity(Model::GasLiquid(Default::default()), [[v[0], v[1]], [v[2], v[3]]]);
        let p = model.instantiate().unwrap();
        let mesh = Mesh::new(1.0, 2.0, 1.0, n, n + 1, 2).unwrap();
        for m in 1..=2 {
            for line in assemble_level(&p, &mesh, m).unwrap().iter().flatten() {
                prop_assert!(line.is_m_matrix());
            }
        }
    }
}

fn interpolated_residual(case: &ManufacturedCase<f64>, n: usize, tau: f64) -> f64 {
    let nt = (0.2 / tau).round() as usize;
    let mesh = Mesh::new(1.0, 1.0, nt as f64 * tau, n, n, nt).unwrap();
    let p = case.problem().unwrap();
    let exact = |m: usize| [0, 1].map(|a| Field::from_fn(&mesh, |x, y| case.exact(a, x, y, mesh.t(m))));
    residual_norm(&p, &mesh, &exact(nt), &exact(nt - 1), nt).unwrap()
}

#[test]
fn truncation_error_orders() {
    let up = ManufacturedCase::<f64>::upwind();
    let r: Vec<f64> = [8, 16, 32].iter().map(|&n| interpolated_residual(&up, n, 0.2 / n as f64)).collect();
    assert!(r[0] / r[1] > 1.7 && r[1] / r[2] > 1.7, "upwind {r:?}");
    let ce = ManufacturedCase::<f64>::central();
    let r: Vec<f64> = [8, 16, 32].iter().map(|&n| interpolated_residual(&ce, n, 0.4 / (n * n) as f64)).collect();
    assert!(r[0] / r[1] > 3.4 && r[1] / r[2] > 3.4, "central {r:?}");
}

#[test]
fn single_precision_march() {
    let mesh = Mesh32::new(1.0, 1.0, 1.0, 6, 6, 3).unwrap();
    let model = Model::<f32>::GasLiquid(Default::default());
    let p = model.instantiate().unwrap();
    let bracket = build_bracket(&p, &mesh, &model.default_bracket(&mesh).unwrap()).unwrap();
    let policy = TimeStepPolicy { slack: 1e-5, ..TimeStepPolicy::default() }.with_delta(1e-4);
    let r = march(&p, &mesh, SweepVariant::GaussSeidel, &policy, &bracket).unwrap();
    assert_eq!(r.report.monotonicity_violations, 0);
    assert!(r.report.levels.iter().all(|l| l.residual <= 1e-4));
}

type Mesh32 = monoblock::mesh::Mesh<f32>;
