use monoblock::init_solutions::build_bracket;
use monoblock::models::Model;
use monoblock::monotone::{march, SweepVariant, TimeStepPolicy};
use monoblock::Mesh;

#[test]
fn bundled_models_march() {
    let mesh = Mesh::new(1.0, 1.0, 1.0, 8, 8, 5).unwrap();
    for model in Model::<f64>::bundled() {
        let p = model.instantiate().unwrap();
        let rule = model.default_bracket(&mesh).unwrap();
        let br = build_bracket(&p, &mesh, &rule).unwrap_or_else(|e| panic!("{}: {e}", model.name()));
        for v in [SweepVariant::Jacobi, SweepVariant::GaussSeidel] {
            let r = march(&p, &mesh, v, &TimeStepPolicy::default(), &br).unwrap_or_else(|e| panic!("{} {v:?}: {e}", model.name()));
            let its: Vec<usize> = r.report.levels.iter().map(|l| l.iterations).collect();
            assert!(its.iter().all(|&n| n >= 1), "{}: {its:?}", model.name());
            assert_eq!(r.report.monotonicity_violations, 0);
            assert!(r.report.levels.iter().all(|l| l.residual_sign_violations == 0 && l.structure_failures == 0));
        }
    }
}
