//! Two-component problem data: reaction terms, their partials, boundary and
//! initial data, and the bound functions the monotone iterations rely on.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// `(x, y, t) -> value`
pub type SpaceTimeFn<T> = Arc<dyn Fn(T, T, T) -> T + Send + Sync>;
/// `(x, y) -> value`
pub type SpaceFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;
/// `(x, y, t, u1, u2) -> value`; arguments are always in component order.
pub type ReactionFn<T> = Arc<dyn Fn(T, T, T, T, T) -> T + Send + Sync>;
/// `(x, y, t) -> (lower corner, upper corner)` of the working sector.
pub type SectorFn<T> = Arc<dyn Fn(T, T, T) -> ([T; 2], [T; 2]) + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuasiMonotoneClass {
    Nondecreasing,
    Nonincreasing,
}

/// How first derivatives are differenced. `Downwind` deliberately breaks the
/// M-matrix structure and exists only to exercise the structural checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Advection {
    #[default]
    Upwind,
    Downwind,
}

pub fn constant_st<T: Real>(v: T) -> SpaceTimeFn<T> {
    Arc::new(move |_, _, _| v)
}
pub fn constant_s<T: Real>(v: T) -> SpaceFn<T> {
    Arc::new(move |_, _| v)
}

#[derive(Clone)]
pub struct Component<T> {
    pub eps: T,
    pub vel1: SpaceTimeFn<T>,
    pub vel2: SpaceTimeFn<T>,
    pub f: ReactionFn<T>,
    pub df_own: ReactionFn<T>,
    pub df_cross: ReactionFn<T>,
    pub g: SpaceTimeFn<T>,
    pub psi: SpaceFn<T>,
    pub c_bound: SpaceTimeFn<T>,
    pub c_lower: SpaceTimeFn<T>,
    pub q_bound: SpaceTimeFn<T>,
}

impl<T: Real> Component<T> {
    /// Pure diffusion component with zero data and zero bounds; callers fill
    /// in the rest with the `with_*` methods.
    pub fn new(eps: T, f: ReactionFn<T>, df_own: ReactionFn<T>, df_cross: ReactionFn<T>) -> Self {
        let z = constant_st(T::zero());
        Component {
            eps,
            vel1: z.clone(),
            vel2: z.clone(),
            f,
            df_own,
            df_cross,
            g: z.clone(),
            psi: constant_s(T::zero()),
            c_bound: z.clone(),
            c_lower: z.clone(),
            q_bound: z,
        }
    }

    pub fn with_velocity(mut self, v1: SpaceTimeFn<T>, v2: SpaceTimeFn<T>) -> Self {
        self.vel1 = v1;
        self.vel2 = v2;
        self
    }
    pub fn with_boundary(mut self, g: SpaceTimeFn<T>) -> Self {
        self.g = g;
        self
    }
    pub fn with_initial(mut self, psi: SpaceFn<T>) -> Self {
        self.psi = psi;
        self
    }
    pub fn with_bounds(mut self, c: SpaceTimeFn<T>, c_lower: SpaceTimeFn<T>, q: SpaceTimeFn<T>) -> Self {
        self.c_bound = c;
        self.c_lower = c_lower;
        self.q_bound = q;
        self
    }
}

#[derive(Clone)]
pub struct ProblemSpec<T> {
    pub name: String,
    pub class: QuasiMonotoneClass,
    pub components: [Component<T>; 2],
    pub sector: Option<SectorFn<T>>,
    pub advection: Advection,
}

impl<T: Real> ProblemSpec<T> {
    pub fn new(name: impl Into<String>, class: QuasiMonotoneClass, c1: Component<T>, c2: Component<T>) -> Self {
        ProblemSpec {
            name: name.into(),
            class,
            components: [c1, c2],
            sector: None,
            advection: Advection::Upwind,
        }
    }

    pub fn with_sector(mut self, sector: SectorFn<T>) -> Self {
        self.sector = Some(sector);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (a, c) in self.components.iter().enumerate() {
            if !(c.eps.is_finite() && c.eps > T::zero()) {
                return Err(Error::InvalidParameter(format!("eps[{a}] must be positive")));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn f(&self, a: usize, x: T, y: T, t: T, u: [T; 2]) -> T {
        (self.components[a].f)(x, y, t, u[0], u[1])
    }
    #[inline]
    pub fn df_own(&self, a: usize, x: T, y: T, t: T, u: [T; 2]) -> T {
        (self.components[a].df_own)(x, y, t, u[0], u[1])
    }
    #[inline]
    pub fn df_cross(&self, a: usize, x: T, y: T, t: T, u: [T; 2]) -> T {
        (self.components[a].df_cross)(x, y, t, u[0], u[1])
    }
    #[inline]
    pub fn g(&self, a: usize, x: T, y: T, t: T) -> T {
        (self.components[a].g)(x, y, t)
    }
    #[inline]
    pub fn psi(&self, a: usize, x: T, y: T) -> T {
        (self.components[a].psi)(x, y)
    }
}

/// Assemble `(u_a, u_other)` into component order.
#[inline]
pub fn ordered<T: Copy>(a: usize, own: T, other: T) -> [T; 2] {
    if a == 0 {
        [own, other]
    } else {
        [other, own]
    }
}

fn level_extreme<T: Real>(
    mesh: &Mesh<T>,
    m: usize,
    f: &SpaceTimeFn<T>,
    what: &str,
    pick: impl Fn(T, T) -> T,
    init: T,
) -> Result<T> {
    let t = mesh.t(m);
    let mut acc = init;
    for i in 0..=mesh.nx() {
        for j in 0..=mesh.ny() {
            let v = f(mesh.x(i), mesh.y(j), t);
            if !v.is_finite() {
                return Err(Error::NonFinite(what.to_string()));
            }
            acc = pick(acc, v);
        }
    }
    Ok(acc)
}

/// `c_{α,m}`: the maximum of `c_bound` over the mesh at level `m`, clamped at 0.
pub fn c_level<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, m: usize) -> Result<[T; 2]> {
    let mut out = [T::zero(); 2];
    for (a, slot) in out.iter_mut().enumerate() {
        let c = level_extreme(mesh, m, &problem.components[a].c_bound, "c_bound", T::max, T::neg_infinity())?;
        *slot = c.max(T::zero());
    }
    Ok(out)
}

/// `Γ_α = c_α U_α − f_α(U)`.
pub fn gamma<T: Real>(problem: &ProblemSpec<T>, c: [T; 2], x: T, y: T, t: T, u: [T; 2]) -> Result<[T; 2]> {
    let mut out = [T::zero(); 2];
    for a in 0..2 {
        let f = problem.f(a, x, y, t, u);
        if !f.is_finite() {
            return Err(Error::NonFinite(format!("reaction f[{a}]")));
        }
        out[a] = c[a] * u[a] - f;
    }
    Ok(out)
}

/// Change of variables `u = e^{λt} z`.
pub fn lambda_shift<T: Real>(problem: &ProblemSpec<T>, lambda: T) -> ProblemSpec<T> {
    let shift = |c: &Component<T>| -> Component<T> {
        let (f, dfo, dfc) = (c.f.clone(), c.df_own.clone(), c.df_cross.clone());
        let (g, cb, cl) = (c.g.clone(), c.c_bound.clone(), c.c_lower.clone());
        let l = lambda;
        Component {
            eps: c.eps,
            vel1: c.vel1.clone(),
            vel2: c.vel2.clone(),
            psi: c.psi.clone(),
            q_bound: c.q_bound.clone(),
            f: Arc::new(move |x, y, t, z1, z2| {
                let e = (l * t).exp();
                f(x, y, t, e * z1, e * z2) / e
            }),
            df_own: Arc::new(move |x, y, t, z1, z2| {
                let e = (l * t).exp();
                l + dfo(x, y, t, e * z1, e * z2)
            }),
            df_cross: Arc::new(move |x, y, t, z1, z2| {
                let e = (l * t).exp();
                dfc(x, y, t, e * z1, e * z2)
            }),
            g: Arc::new(move |x, y, t| g(x, y, t) / (l * t).exp()),
            c_bound: Arc::new(move |x, y, t| cb(x, y, t) + l),
            c_lower: Arc::new(move |x, y, t| cl(x, y, t) + l),
        }
    };
    let mut c1 = shift(&problem.components[0]);
    let mut c2 = shift(&problem.components[1]);
    // add the λ z_α term, which depends on the component index
    let (f1, f2) = (c1.f.clone(), c2.f.clone());
    c1.f = Arc::new(move |x, y, t, z1, z2| lambda * z1 + f1(x, y, t, z1, z2));
    c2.f = Arc::new(move |x, y, t, z1, z2| lambda * z2 + f2(x, y, t, z1, z2));
    let sector = problem.sector.clone().map(|s| {
        let out: SectorFn<T> = Arc::new(move |x, y, t| {
            let (lo, hi) = s(x, y, t);
            let e = (lambda * t).exp();
            ([lo[0] / e, lo[1] / e], [hi[0] / e, hi[1] / e])
        });
        out
    });
    ProblemSpec {
        name: problem.name.clone(),
        class: problem.class,
        components: [c1, c2],
        sector,
        advection: problem.advection,
    }
}

/// Outcome of the sampled consistency audit of a problem definition.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct ProblemAudit {
    pub samples: usize,
    pub derivative_mismatches: usize,
    pub bound_violations: usize,
    pub class_violations: usize,
    pub gamma_violations: usize,
    pub notes: Vec<String>,
}

impl ProblemAudit {
    pub fn passed(&self) -> bool {
        self.derivative_mismatches == 0
            && self.bound_violations == 0
            && self.class_violations == 0
            && self.gamma_violations == 0
    }
}

fn central_diff<T: Real>(f: &ReactionFn<T>, x: T, y: T, t: T, u: [T; 2], k: usize) -> T {
    let h = T::lit(1e-6) * (T::one() + u[k].abs());
    let mut up = u;
    let mut dn = u;
    up[k] += h;
    dn[k] -= h;
    (f(x, y, t, up[0], up[1]) - f(x, y, t, dn[0], dn[1])) / (up[k] - dn[k])
}

/// Sample `samples` random points of the space-time domain and the working
/// sector and check derivative consistency, the two-sided bounds, the
/// quasi-monotone sign, and monotonicity of Γ.
pub fn audit_problem<T: Real>(problem: &ProblemSpec<T>, mesh: &Mesh<T>, seed: u64, samples: usize) -> Result<ProblemAudit> {
    let sector = problem
        .sector
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("problem has no sector for sampling".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut audit = ProblemAudit { samples, ..Default::default() };
    let tol = 1e-5;
    let slack = T::lit(1e-12);
    let s = &mesh.spec;
    for _ in 0..samples {
        let x = T::lit(rng.gen::<f64>()) * s.l1;
        let y = T::lit(rng.gen::<f64>()) * s.l2;
        let t = T::lit(rng.gen::<f64>()) * s.t_final;
        let (lo, hi) = sector(x, y, t);
        let draw = |rng: &mut ChaCha8Rng, k: usize| lo[k] + (hi[k] - lo[k]) * T::lit(rng.gen::<f64>());
        let u = [draw(&mut rng, 0), draw(&mut rng, 1)];
        let v = [draw(&mut rng, 0), draw(&mut rng, 1)];
        for a in 0..2 {
            let comp = &problem.components[a];
            let own = problem.df_own(a, x, y, t, u);
            let cross = problem.df_cross(a, x, y, t, u);
            let fd_own = central_diff(&comp.f, x, y, t, u, a);
            let fd_cross = central_diff(&comp.f, x, y, t, u, 1 - a);
            if (own - fd_own).abs().as_f64() > tol * (1.0 + own.abs().as_f64())
                || (cross - fd_cross).abs().as_f64() > tol * (1.0 + cross.abs().as_f64())
            {
                audit.derivative_mismatches += 1;
                if audit.notes.len() < 8 {
                    audit.notes.push(format!(
                        "f[{a}] derivative mismatch at u=({:.4e},{:.4e}): own {own:.6e} vs {fd_own:.6e}, cross {cross:.6e} vs {fd_cross:.6e}",
                        u[0], u[1]
                    ));
                }
            }
            let c = (comp.c_bound)(x, y, t);
            let cl = (comp.c_lower)(x, y, t);
            let q = (comp.q_bound)(x, y, t);
            if own > c + slack || own < cl - slack || cross.abs() > q + slack {
                audit.bound_violations += 1;
                if audit.notes.len() < 8 {
                    audit.notes.push(format!(
                        "f[{a}] bounds: own {own:.6e} not in [{cl:.6e}, {c:.6e}] or |cross| {:.6e} > {q:.6e}",
                        cross.abs()
                    ));
                }
            }
            let ok = match problem.class {
                QuasiMonotoneClass::Nondecreasing => -cross >= -slack,
                QuasiMonotoneClass::Nonincreasing => -cross <= slack,
            };
            if !ok {
                audit.class_violations += 1;
            }
        }
        // Γ monotonicity on the ordered pair (max, min)
        let hi_u = [u[0].max(v[0]), u[1].max(v[1])];
        let lo_u = [u[0].min(v[0]), u[1].min(v[1])];
        let mut c = [T::zero(); 2];
        for a in 0..2 {
            c[a] = (problem.components[a].c_bound)(x, y, t).max(T::zero());
        }
        let ok = match problem.class {
            QuasiMonotoneClass::Nondecreasing => {
                let gu = gamma(problem, c, x, y, t, hi_u)?;
                let gv = gamma(problem, c, x, y, t, lo_u)?;
                gu[0] >= gv[0] - slack && gu[1] >= gv[1] - slack
            }
            QuasiMonotoneClass::Nonincreasing => {
                let g1 = gamma(problem, c, x, y, t, [hi_u[0], lo_u[1]])?;
                let g2 = gamma(problem, c, x, y, t, [lo_u[0], hi_u[1]])?;
                g1[0] >= g2[0] - slack && g2[1] >= g1[1] - slack
            }
        };
        if !ok {
            audit.gamma_violations += 1;
        }
    }
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_rf() -> ReactionFn<f64> {
        Arc::new(|_, _, _, _, _| 0.0)
    }

    fn decay_problem() -> ProblemSpec<f64> {
        let c1 = Component::new(1.0, Arc::new(|_, _, _, u1, _| -u1), Arc::new(|_, _, _, _, _| -1.0), zero_rf())
            .with_bounds(constant_st(-1.0), constant_st(-1.0), constant_st(0.0));
        let c2 = Component::new(1.0, zero_rf(), zero_rf(), zero_rf());
        ProblemSpec::new("decay", QuasiMonotoneClass::Nondecreasing, c1, c2)
            .with_sector(Arc::new(|_, _, _| ([0.0, 0.0], [1.0, 1.0])))
    }

    #[test]
    fn c_level_of_identity_in_x() {
        let mesh = Mesh::new(1.0, 1.0, 1.0, 4, 4, 2).unwrap();
        let mut p = decay_problem();
        p.components[0].c_bound = Arc::new(|x, _, _| x);
        assert_eq!(c_level(&p, &mesh, 1).unwrap(), [1.0, 0.0]);
    }

    #[test]
    fn c_level_rejects_nan() {
        let mesh = Mesh::new(1.0, 1.0, 1.0, 4, 4, 2).unwrap();
        let mut p = decay_problem();
        p.components[1].c_bound = constant_st(f64::NAN);
        assert!(c_level(&p, &mesh, 1).is_err());
    }

    #[test]
    fn gamma_without_reaction() {
        let c = Component::new(1.0, zero_rf(), zero_rf(), zero_rf());
        let p = ProblemSpec::new("zero", QuasiMonotoneClass::Nondecreasing, c.clone(), c);
        assert_eq!(gamma(&p, [1.0, 1.0], 0.5, 0.5, 0.0, [2.0, 3.0]).unwrap(), [2.0, 3.0]);
    }

    #[test]
    fn shift_adds_lambda_to_own_derivative() {
        let p = lambda_shift(&decay_problem(), 2.0);
        for &(t, z) in &[(0.0, 0.3), (0.7, 1.5), (1.0, -2.0)] {
            assert_eq!(p.df_own(0, 0.2, 0.4, t, [z, 0.1]), 1.0);
        }
        // f* = 2z - e^{-2t} e^{2t} z = z
        assert!((p.f(0, 0.0, 0.0, 0.8, [0.25, 0.0]) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn zero_shift_is_identity() {
        let p = decay_problem();
        let s = lambda_shift(&p, 0.0);
        for &(t, u1, u2) in &[(0.1, 0.2, 0.3), (0.9, 1.0, 0.0)] {
            for a in 0..2 {
                assert_eq!(p.f(a, 0.3, 0.6, t, [u1, u2]), s.f(a, 0.3, 0.6, t, [u1, u2]));
                assert_eq!(p.df_own(a, 0.3, 0.6, t, [u1, u2]), s.df_own(a, 0.3, 0.6, t, [u1, u2]));
                assert_eq!(p.g(a, 0.3, 0.6, t), s.g(a, 0.3, 0.6, t));
            }
        }
    }

    #[test]
    fn audit_catches_wrong_derivative() {
        let mesh = Mesh::new(1.0, 1.0, 1.0, 4, 4, 2).unwrap();
        let p = decay_problem();
        assert!(audit_problem(&p, &mesh, 7, 200).unwrap().passed());
        let mut bad = p.clone();
        bad.components[0].df_own = Arc::new(|_, _, _, _, _| -2.0);
        let a = audit_problem(&bad, &mesh, 7, 200).unwrap();
        assert!(a.derivative_mismatches > 0);
    }
}
