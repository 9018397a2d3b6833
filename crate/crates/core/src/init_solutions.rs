//! Ordered initial upper and lower solutions for every time level.

use crate::blocksolve::{solve_block_tridiag, BlockRow};
use crate::discretization::{assemble_line, boundary_field};
use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh, Pair};
use crate::monotone::verify_ordered_pair;
use crate::reaction::{ordered, ProblemSpec, QuasiMonotoneClass};
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const SECTOR_SEED: u64 = 7;
const SECTOR_SAMPLES: usize = 200;

/// How one component of a bracket is built. Every rule starts from `ψ` at `m = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ComponentRule<T> {
    /// Zero for `m >= 1`.
    Zero,
    /// Solution of the reaction-free scheme with source `M`; `None` picks `M` by sampling.
    Linear { source: Option<T> },
    /// The constant `K` for `m >= 1`.
    Constant { level: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionRule<T> {
    pub lower: [ComponentRule<T>; 2],
    pub upper: [ComponentRule<T>; 2],
}

impl<T: Real> ConstructionRule<T> {
    pub fn zero_constant(k: [T; 2]) -> Self {
        ConstructionRule {
            lower: [ComponentRule::Zero; 2],
            upper: [ComponentRule::Constant { level: k[0] }, ComponentRule::Constant { level: k[1] }],
        }
    }
    pub fn zero_linear(m: Option<[T; 2]>) -> Self {
        let r = |a: usize| ComponentRule::Linear { source: m.map(|v| v[a]) };
        ConstructionRule { lower: [ComponentRule::Zero; 2], upper: [r(0), r(1)] }
    }
    /// Linear upper with source `m0` for component 1 and the constant `e0` for component 2.
    pub fn auxiliary_linear(m0: T, e0: T) -> Self {
        ConstructionRule {
            lower: [ComponentRule::Zero; 2],
            upper: [ComponentRule::Linear { source: Some(m0) }, ComponentRule::Constant { level: e0 }],
        }
    }
}

/// Lower and upper trajectories for `m = 0..=Nt`.
#[derive(Debug, Clone)]
pub struct Bracket<T> {
    pub lower: Vec<Pair<T>>,
    pub upper: Vec<Pair<T>>,
}

impl<T: Real> Bracket<T> {
    /// Bracket from explicit trajectories, verified level by level.
    pub fn from_trajectories(problem: &ProblemSpec<T>, mesh: &Mesh<T>, lower: Vec<Pair<T>>, upper: Vec<Pair<T>>) -> Result<Self> {
        let b = Bracket { lower, upper };
        b.verify(problem, mesh)?;
        Ok(b)
    }

    pub fn verify(&self, problem: &ProblemSpec<T>, mesh: &Mesh<T>) -> Result<()> {
        let n = mesh.nt() + 1;
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.lower.len().min(self.upper.len()) });
        }
        for m in 1..n {
            let check = verify_ordered_pair(problem, mesh, m, &self.upper[m], &self.lower[m], &self.upper[m - 1], &self.lower[m - 1])?;
            if !check.ok() {
                return Err(Error::ConstructionRefused(format!("level {m}: {}", check.summary())));
            }
        }
        Ok(())
    }
}

fn psi_field<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, a: usize) -> Field<T> {
    Field::from_fn(mesh, |x, y| problem.psi(a, x, y))
}

fn refuse<T>(msg: String) -> Result<T> {
    Err(Error::ConstructionRefused(msg))
}

fn slack<T: Real>(scale: T) -> T {
    T::lit(1e-12) * (T::one() + scale.abs())
}

/// Check `lo <= ψ_a <= hi` on every node and `lo <= g_a <= hi` on the boundary at every level.
fn check_data<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, a: usize, lo: Option<T>, hi: Option<T>) -> Result<()> {
    let inside = |v: T| lo.is_none_or(|l| v >= l - slack(l)) && hi.is_none_or(|h| v <= h + slack(h));
    let range = format!("[{}, {}]", lo.map_or("-inf".into(), |v| format!("{v:e}")), hi.map_or("inf".into(), |v| format!("{v:e}")));
    for i in 0..=mesh.nx() {
        for j in 0..=mesh.ny() {
            let (x, y) = (mesh.x(i), mesh.y(j));
            let p = problem.psi(a, x, y);
            if !inside(p) {
                return refuse(format!("component {}: initial value {p:e} at ({x}, {y}) outside {range}", a + 1));
            }
            if i == 0 || j == 0 || i == mesh.nx() || j == mesh.ny() {
                for m in 1..=mesh.nt() {
                    let g = problem.g(a, x, y, mesh.t(m));
                    if !inside(g) {
                        return refuse(format!(
                            "component {}: boundary value {g:e} at ({x}, {y}, {}) outside {range}",
                            a + 1,
                            mesh.t(m)
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Random points `(x, y, t, u)` from the problem's sector plus its corners.
/// `(x, y, t, lower, upper, point)`
type Sample<T> = (T, T, T, [T; 2], [T; 2], [T; 2]);

fn sector_samples<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>) -> Result<Vec<Sample<T>>> {
    let sector = problem
        .sector
        .as_ref()
        .ok_or_else(|| Error::ConstructionRefused("problem declares no sector to sample".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(SECTOR_SEED);
    let s = &mesh.spec;
    let mut out = Vec::with_capacity(SECTOR_SAMPLES + 8);
    for k in 0..SECTOR_SAMPLES {
        let (x, y, t) = if k < 4 {
            // corners of the space-time box
            let c = |b: bool, v: T| if b { v } else { T::zero() };
            (c(k & 1 == 1, s.l1), c(k & 2 == 2, s.l2), c(k < 2, s.t_final))
        } else {
            (T::lit(rng.gen::<f64>()) * s.l1, T::lit(rng.gen::<f64>()) * s.l2, T::lit(rng.gen::<f64>()) * s.t_final)
        };
        let (lo, hi) = sector(x, y, t);
        let mut u = [T::zero(); 2];
        for a in 0..2 {
            u[a] = lo[a] + (hi[a] - lo[a]) * T::lit(rng.gen::<f64>());
        }
        out.push((x, y, t, u, lo, hi));
        if k < 4 {
            out.push((x, y, t, lo, lo, hi));
            out.push((x, y, t, hi, lo, hi));
        }
    }
    Ok(out)
}

/// `f_a` on the sampled admissible set for a linear upper solution; returns its minimum.
fn min_f_admissible<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, a: usize) -> Result<T> {
    let mut min = T::infinity();
    for (x, y, t, u, lo, _) in sector_samples(problem, mesh)? {
        let arg = match problem.class {
            QuasiMonotoneClass::Nondecreasing => u,
            QuasiMonotoneClass::Nonincreasing => ordered(a, u[a], lo[1 - a]),
        };
        let f = problem.f(a, x, y, t, arg);
        if !f.is_finite() {
            return Err(Error::NonFinite(format!("f[{a}] on the sector")));
        }
        min = min.min(f);
    }
    Ok(min)
}

/// Default source for a linear upper solution: `1.1 * max(0, -min f)`.
pub fn default_source<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, a: usize) -> Result<T> {
    Ok(T::lit(1.1) * (-min_f_admissible(problem, mesh, a)?).max(T::zero()))
}

/// `ψ` at `m = 0` and zero afterwards, after checking the sign assumptions.
pub fn lower_zero<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, m: usize) -> Result<Pair<T>> {
    for a in 0..2 {
        check_data(problem, mesh, a, Some(T::zero()), None)?;
        for (x, y, t, u, lo, hi) in sector_samples(problem, mesh)? {
            let partners: Vec<T> = match problem.class {
                QuasiMonotoneClass::Nondecreasing => vec![T::zero()],
                QuasiMonotoneClass::Nonincreasing => vec![lo[1 - a], u[1 - a], hi[1 - a]],
            };
            for p in partners {
                let f = problem.f(a, x, y, t, ordered(a, T::zero(), p));
                if !(f <= slack(T::zero())) {
                    return refuse(format!("component {}: f = {f:e} > 0 at zero (x={x}, y={y}, t={t})", a + 1));
                }
            }
        }
    }
    if m == 0 {
        Ok([psi_field(problem, mesh, 0), psi_field(problem, mesh, 1)])
    } else {
        Ok([Field::for_mesh(mesh), Field::for_mesh(mesh)])
    }
}

/// Trajectory of the reaction-free scheme for component `a` with constant source `source`.
pub fn linear_trajectory<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, a: usize, source: T) -> Result<Vec<Field<T>>> {
    let mut traj = vec![psi_field(problem, mesh, a)];
    for m in 1..=mesh.nt() {
        let systems = (1..mesh.nx()).map(|i| assemble_line(problem, mesh, a, i, m)).collect::<Result<Vec<_>>>()?;
        let mats: Vec<_> = systems.iter().map(|s| s.matrix(T::zero())).collect();
        let rows: Vec<BlockRow<T>> = systems
            .iter()
            .zip(&mats)
            .map(|(s, mat)| BlockRow { a: mat, left: &s.left, right: &s.right })
            .collect();
        let prev = &traj[m - 1];
        let rhs: Vec<Vec<T>> = systems
            .iter()
            .map(|s| {
                prev.interior_line(s.i)
                    .iter()
                    .zip(&s.gstar)
                    .map(|(&p, &g)| s.inv_tau * p + source - g)
                    .collect()
            })
            .collect();
        let sol = solve_block_tridiag(&rows, &rhs)?;
        let mut f = boundary_field(problem, mesh, a, m);
        for (k, line) in sol.iter().enumerate() {
            f.interior_line_mut(k + 1).copy_from_slice(line);
        }
        if !f.is_finite() {
            return Err(Error::NonFinite("linear upper solution".into()));
        }
        traj.push(f);
    }
    Ok(traj)
}

/// Both components of the reaction-free upper solution.
pub fn upper_linear<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, source: [T; 2]) -> Result<Vec<Pair<T>>> {
    for a in 0..2 {
        if !(source[a] >= T::zero()) {
            return Err(Error::InvalidParameter(format!("source M[{a}] must be nonnegative")));
        }
        let min = min_f_admissible(problem, mesh, a)?;
        if min < -source[a] - slack(source[a]) {
            return refuse(format!("component {}: f reaches {min:e} below -M = {:e}", a + 1, -source[a]));
        }
    }
    let t0 = linear_trajectory(problem, mesh, 0, source[0])?;
    let t1 = linear_trajectory(problem, mesh, 1, source[1])?;
    Ok(t0.into_iter().zip(t1).map(|(a, b)| [a, b]).collect())
}

/// `ψ` at `m = 0` and the constants `K` afterwards, after checking the assumptions.
pub fn upper_constant<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, k: [T; 2]) -> Result<Vec<Pair<T>>> {
    for a in 0..2 {
        check_data(problem, mesh, a, Some(T::zero()), Some(k[a]))?;
        for (x, y, t, _, lo, _) in sector_samples(problem, mesh)? {
            let arg = match problem.class {
                QuasiMonotoneClass::Nondecreasing => k,
                QuasiMonotoneClass::Nonincreasing => ordered(a, k[a], lo[1 - a]),
            };
            let f = problem.f(a, x, y, t, arg);
            if !(f >= -slack(k[a])) {
                return refuse(format!("component {}: f = {f:e} < 0 at K (x={x}, y={y}, t={t})", a + 1));
            }
        }
    }
    let mut traj = vec![[psi_field(problem, mesh, 0), psi_field(problem, mesh, 1)]];
    for _ in 1..=mesh.nt() {
        traj.push([Field::constant(mesh.nx(), mesh.ny(), k[0]), Field::constant(mesh.nx(), mesh.ny(), k[1])]);
    }
    Ok(traj)
}

/// Build the trajectories named by `rule`, check the sign assumptions at every
/// node against the partner trajectories, and verify the ordered pair at every level.
pub fn build_bracket<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, rule: &ConstructionRule<T>) -> Result<Bracket<T>> {
    let levels = mesh.nt() + 1;
    let mut traj: [[Vec<Field<T>>; 2]; 2] = Default::default(); // [lower, upper][component]
    let mut sources: [[Option<T>; 2]; 2] = [[None; 2]; 2];
    for (side, rules) in [rule.lower, rule.upper].iter().enumerate() {
        for a in 0..2 {
            traj[side][a] = match rules[a] {
                ComponentRule::Zero => {
                    check_data(problem, mesh, a, if side == 0 { None } else { Some(T::zero()) }, if side == 0 { None } else { Some(T::zero()) })?;
                    let mut v = vec![psi_field(problem, mesh, a)];
                    v.extend((1..levels).map(|_| Field::for_mesh(mesh)));
                    v
                }
                ComponentRule::Constant { level } => {
                    if side == 1 {
                        check_data(problem, mesh, a, None, Some(level))?;
                    } else {
                        check_data(problem, mesh, a, Some(level), None)?;
                    }
                    let mut v = vec![psi_field(problem, mesh, a)];
                    v.extend((1..levels).map(|_| Field::constant(mesh.nx(), mesh.ny(), level)));
                    v
                }
                ComponentRule::Linear { source } => {
                    if side == 0 {
                        return refuse("linear rule is only available for upper solutions".into());
                    }
                    let s = match source {
                        Some(s) => s,
                        None => default_source(problem, mesh, a)?,
                    };
                    if !(s >= T::zero()) {
                        return Err(Error::InvalidParameter(format!("source M[{a}] must be nonnegative")));
                    }
                    sources[side][a] = Some(s);
                    linear_trajectory(problem, mesh, a, s)?
                }
            };
        }
    }
    if matches!(rule.lower, [ComponentRule::Zero, ComponentRule::Zero]) {
        for a in 0..2 {
            check_data(problem, mesh, a, Some(T::zero()), None)?;
        }
    }
    // pointwise sign conditions with the class pairing of partners
    for m in 1..levels {
        let t = mesh.t(m);
        for i in 0..=mesh.nx() {
            for j in 0..=mesh.ny() {
                let (x, y) = (mesh.x(i), mesh.y(j));
                let lo = [traj[0][0][m].get(i, j), traj[0][1][m].get(i, j)];
                let hi = [traj[1][0][m].get(i, j), traj[1][1][m].get(i, j)];
                for a in 0..2 {
                    let (up_arg, lo_arg) = match problem.class {
                        QuasiMonotoneClass::Nondecreasing => (hi, lo),
                        QuasiMonotoneClass::Nonincreasing => (ordered(a, hi[a], lo[1 - a]), ordered(a, lo[a], hi[1 - a])),
                    };
                    let fu = problem.f(a, x, y, t, up_arg);
                    let need = sources[1][a].map_or(T::zero(), |s| -s);
                    if !(fu >= need - slack(need)) {
                        return refuse(format!("component {}: upper reaction {fu:e} < {need:e} at ({x}, {y}, {t})", a + 1));
                    }
                    if matches!(rule.lower[a], ComponentRule::Zero) {
                        let fl = problem.f(a, x, y, t, lo_arg);
                        if !(fl <= slack(T::zero())) {
                            return refuse(format!("component {}: lower reaction {fl:e} > 0 at ({x}, {y}, {t})", a + 1));
                        }
                    }
                }
            }
        }
    }
    let [[l0, l1], [u0, u1]] = traj;
    let bracket = Bracket {
        lower: l0.into_iter().zip(l1).map(|(a, b)| [a, b]).collect(),
        upper: u0.into_iter().zip(u1).map(|(a, b)| [a, b]).collect(),
    };
    bracket.verify(problem, mesh)?;
    Ok(bracket)
}
