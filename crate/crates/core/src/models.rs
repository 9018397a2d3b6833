//! Bundled application models and their default brackets.

use crate::error::{Error, Result};
use crate::init_solutions::ConstructionRule;
use crate::mesh::Mesh;
use crate::reaction::{constant_st, Component, ProblemSpec, QuasiMonotoneClass, ReactionFn, SpaceFn, SpaceTimeFn};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Spatial profile used for boundary and initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile<T> {
    Constant { value: T },
    /// `base + amplitude * exp(-((x-cx)^2 + (y-cy)^2) / width^2)`
    Gaussian { base: T, amplitude: T, cx: T, cy: T, width: T },
    /// `amplitude * sin(pi x / lx) * sin(pi y / ly)`
    SineBump { amplitude: T, lx: T, ly: T },
}

impl<T: Real> Profile<T> {
    pub fn constant(value: T) -> Self {
        Profile::Constant { value }
    }

    pub fn eval(&self, x: T, y: T) -> T {
        match *self {
            Profile::Constant { value } => value,
            Profile::Gaussian { base, amplitude, cx, cy, width } => {
                let r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                base + amplitude * (-r2 / (width * width)).exp()
            }
            Profile::SineBump { amplitude, lx, ly } => {
                let pi = T::lit(PI);
                amplitude * (pi * x / lx).sin() * (pi * y / ly).sin()
            }
        }
    }

    /// An upper bound of the profile over the plane.
    pub fn sup(&self) -> T {
        match *self {
            Profile::Constant { value } => value,
            Profile::Gaussian { base, amplitude, .. } => base + amplitude.max(T::zero()),
            Profile::SineBump { amplitude, .. } => amplitude.abs(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Profile::Gaussian { width, .. } if !(width > T::zero()) => Err(Error::InvalidParameter("gaussian width must be positive".into())),
            Profile::SineBump { lx, ly, .. } if !(lx > T::zero() && ly > T::zero()) => {
                Err(Error::InvalidParameter("sine bump periods must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn space(self) -> SpaceFn<T> {
        Arc::new(move |x, y| self.eval(x, y))
    }
    pub fn space_time(self) -> SpaceTimeFn<T> {
        Arc::new(move |x, y, _| self.eval(x, y))
    }
}

/// Diffusion, velocity and data shared by every model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transport<T> {
    pub eps: [T; 2],
    /// `velocity[a] = (v_{a,1}, v_{a,2})`
    pub velocity: [[T; 2]; 2],
    pub boundary: [Profile<T>; 2],
    pub initial: [Profile<T>; 2],
}

impl<T: Real> Transport<T> {
    fn new(boundary: [Profile<T>; 2], initial: [Profile<T>; 2]) -> Self {
        Transport { eps: [T::lit(0.1); 2], velocity: [[T::zero(); 2]; 2], boundary, initial }
    }

    fn validate(&self) -> Result<()> {
        for a in 0..2 {
            if !(self.eps[a] > T::zero()) {
                return Err(Error::InvalidParameter(format!("eps[{a}] must be positive")));
            }
            self.boundary[a].validate()?;
            self.initial[a].validate()?;
        }
        Ok(())
    }

    fn component(&self, a: usize, f: ReactionFn<T>, df_own: ReactionFn<T>, df_cross: ReactionFn<T>) -> Component<T> {
        Component::new(self.eps[a], f, df_own, df_cross)
            .with_velocity(constant_st(self.velocity[a][0]), constant_st(self.velocity[a][1]))
            .with_boundary(self.boundary[a].space_time())
            .with_initial(self.initial[a].space())
    }

    fn data_sup(&self, a: usize) -> T {
        self.boundary[a].sup().max(self.initial[a].sup())
    }
}

fn positive<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive (got {v})")))
    }
}

fn cap<T: Real>(v: T) -> T {
    if v > T::zero() {
        T::lit(1.05) * v
    } else {
        T::one()
    }
}

macro_rules! rf {
    (|$u1:ident, $u2:ident| $body:expr) => {
        Arc::new(move |_: T, _: T, _: T, $u1: T, $u2: T| $body) as ReactionFn<T>
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GasLiquidParams<T> {
    pub sigma: [T; 2],
    pub rho1: T,
    /// Sector cap for the dissolved gas; defaults to 5% above its data maximum.
    pub rho2: Option<T>,
    #[serde(flatten)]
    pub transport: Transport<T>,
}

impl<T: Real> Default for GasLiquidParams<T> {
    fn default() -> Self {
        let l = T::lit;
        GasLiquidParams {
            sigma: [T::one(); 2],
            rho1: T::one(),
            rho2: None,
            transport: Transport::new(
                [Profile::constant(l(0.5)), Profile::constant(T::one())],
                [
                    Profile::Gaussian { base: T::zero(), amplitude: l(0.5), cx: l(0.5), cy: l(0.5), width: l(0.25) },
                    Profile::constant(T::zero()),
                ],
            ),
        }
    }
}

impl<T: Real> GasLiquidParams<T> {
    pub fn rho(&self) -> [T; 2] {
        [self.rho1, self.rho2.unwrap_or_else(|| cap(self.transport.data_sup(1)))]
    }

    pub fn problem(&self) -> Result<ProblemSpec<T>> {
        self.transport.validate()?;
        positive("sigma1", self.sigma[0])?;
        positive("sigma2", self.sigma[1])?;
        let [r1, r2] = self.rho();
        positive("rho1", r1)?;
        positive("rho2", r2)?;
        if self.transport.boundary[0].sup() > r1 {
            return Err(Error::InvalidParameter("rho1 must bound the boundary data of component 1".into()));
        }
        if self.transport.boundary[1].sup() > r2 {
            return Err(Error::InvalidParameter("rho2 must bound the boundary data of component 2".into()));
        }
        let [s1, s2] = self.sigma;
        let tr = &self.transport;
        let c1 = tr
            .component(0, rf!(|u1, u2| -s1 * (r1 - u1) * u2), rf!(|_u1, u2| s1 * u2), rf!(|u1, _u2| -s1 * (r1 - u1)))
            .with_bounds(constant_st(s1 * r2), constant_st(T::zero()), constant_st(s1 * r1));
        let c2 = tr
            .component(1, rf!(|u1, u2| s2 * (r1 - u1) * u2), rf!(|u1, _u2| s2 * (r1 - u1)), rf!(|_u1, u2| -s2 * u2))
            .with_bounds(constant_st(s2 * r1), constant_st(T::zero()), constant_st(s2 * r2));
        Ok(ProblemSpec::new("gas-liquid", QuasiMonotoneClass::Nondecreasing, c1, c2)
            .with_sector(Arc::new(move |_, _, _| ([T::zero(); 2], [r1, r2]))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct VolterraLotkaParams<T> {
    pub a: [T; 2],
    /// Overrides the default `M_2`; `M_1 = a_1 M_2 + 1`.
    pub m2: Option<T>,
    pub eps: [T; 2],
    pub velocity: [[T; 2]; 2],
    pub initial: [Profile<T>; 2],
}

impl<T: Real> Default for VolterraLotkaParams<T> {
    fn default() -> Self {
        let l = T::lit;
        VolterraLotkaParams {
            a: [l(0.5); 2],
            m2: None,
            eps: [l(0.1); 2],
            velocity: [[T::zero(); 2]; 2],
            initial: [
                Profile::SineBump { amplitude: T::one(), lx: T::one(), ly: T::one() },
                Profile::Gaussian { base: T::zero(), amplitude: l(0.8), cx: l(0.3), cy: l(0.6), width: l(0.2) },
            ],
        }
    }
}

impl<T: Real> VolterraLotkaParams<T> {
    pub fn caps(&self) -> [T; 2] {
        let [a1, a2] = self.a;
        let m2 = self.m2.unwrap_or_else(|| {
            ((a2 + T::one()) / (T::one() - a1 * a2))
                .max(self.initial[1].sup())
                .max((self.initial[0].sup() - T::one()) / a1)
        });
        [a1 * m2 + T::one(), m2]
    }

    fn transport(&self) -> Transport<T> {
        Transport { eps: self.eps, velocity: self.velocity, boundary: [Profile::constant(T::zero()); 2], initial: self.initial }
    }

    pub fn problem(&self) -> Result<ProblemSpec<T>> {
        let tr = self.transport();
        tr.validate()?;
        let [a1, a2] = self.a;
        positive("a1", a1)?;
        positive("a2", a2)?;
        if !(a1 * a2 < T::one()) {
            return Err(Error::InvalidParameter("need a1 * a2 < 1".into()));
        }
        let [m1, m2] = self.caps();
        if !(a1 * m2 + T::one() <= m1 * (T::one() + T::lit(1e-12)) && m1 <= (m2 - T::one()) / a2 * (T::one() + T::lit(1e-12))) {
            return Err(Error::InvalidParameter("caps violate a1*M2 + 1 <= M1 <= (M2 - 1)/a2".into()));
        }
        let two = T::lit(2.0);
        let c1 = tr
            .component(
                0,
                rf!(|u1, u2| -u1 * (T::one() - u1 + a1 * u2)),
                rf!(|u1, u2| two * u1 - a1 * u2 - T::one()),
                rf!(|u1, _u2| -a1 * u1),
            )
            .with_bounds(constant_st(two * m1), constant_st(-a1 * m2 - T::one()), constant_st(a1 * m1));
        let c2 = tr
            .component(
                1,
                rf!(|u1, u2| -u2 * (T::one() + a2 * u1 - u2)),
                rf!(|u1, u2| two * u2 - a2 * u1 - T::one()),
                rf!(|_u1, u2| -a2 * u2),
            )
            .with_bounds(constant_st(two * m2), constant_st(-a2 * m1 - T::one()), constant_st(a2 * m2));
        Ok(ProblemSpec::new("volterra-lotka", QuasiMonotoneClass::Nondecreasing, c1, c2)
            .with_sector(Arc::new(move |_, _, _| ([T::zero(); 2], [m1, m2]))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BelousovZhabotinskiiParams<T> {
    pub a: T,
    pub b: T,
    pub sigma: [T; 2],
    /// Sector caps; default 5% above the admissible minimum.
    pub k: Option<[T; 2]>,
    #[serde(flatten)]
    pub transport: Transport<T>,
}

impl<T: Real> Default for BelousovZhabotinskiiParams<T> {
    fn default() -> Self {
        let l = T::lit;
        BelousovZhabotinskiiParams {
            a: T::one(),
            b: T::one(),
            sigma: [l(0.5); 2],
            k: None,
            transport: Transport::new(
                [Profile::constant(l(0.5)), Profile::constant(l(0.5))],
                [
                    Profile::Gaussian { base: l(0.5), amplitude: l(0.4), cx: l(0.5), cy: l(0.5), width: l(0.25) },
                    Profile::constant(l(0.5)),
                ],
            ),
        }
    }
}

impl<T: Real> BelousovZhabotinskiiParams<T> {
    pub fn caps(&self) -> [T; 2] {
        self.k.unwrap_or_else(|| [cap((self.a / self.b).max(self.transport.data_sup(0))), cap(self.transport.data_sup(1))])
    }

    pub fn problem(&self) -> Result<ProblemSpec<T>> {
        self.transport.validate()?;
        let (a, b, [s1, s2]) = (self.a, self.b, self.sigma);
        for (n, v) in [("a", a), ("b", b), ("sigma1", s1), ("sigma2", s2)] {
            positive(n, v)?;
        }
        let [k1, k2] = self.caps();
        if k1 < a / b || k1 < self.transport.data_sup(0) || k2 < self.transport.data_sup(1) {
            return Err(Error::InvalidParameter("K below a/b or the data maximum".into()));
        }
        let two = T::lit(2.0);
        let tr = &self.transport;
        let c1 = tr
            .component(0, rf!(|u1, u2| -u1 * (a - b * u1 - s1 * u2)), rf!(|u1, u2| -a + two * b * u1 + s1 * u2), rf!(|u1, _u2| s1 * u1))
            .with_bounds(constant_st(two * b * k1 + s1 * k2), constant_st(-a), constant_st(s1 * k1));
        let c2 = tr
            .component(1, rf!(|u1, u2| s2 * u1 * u2), rf!(|u1, _u2| s2 * u1), rf!(|_u1, u2| s2 * u2))
            .with_bounds(constant_st(s2 * k1), constant_st(T::zero()), constant_st(s2 * k2));
        Ok(ProblemSpec::new("belousov-zhabotinskii", QuasiMonotoneClass::Nonincreasing, c1, c2)
            .with_sector(Arc::new(move |_, _, _| ([T::zero(); 2], [k1, k2]))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnzymeSubstrateParams<T> {
    pub a: [T; 2],
    pub b: [T; 2],
    pub e0: T,
    /// Source of the auxiliary linear problem; must exceed `b_1 E_0`.
    pub m0: Option<T>,
    #[serde(flatten)]
    pub transport: Transport<T>,
}

impl<T: Real> Default for EnzymeSubstrateParams<T> {
    fn default() -> Self {
        let l = T::lit;
        EnzymeSubstrateParams {
            a: [l(0.5); 2],
            b: [l(0.5); 2],
            e0: T::one(),
            m0: None,
            transport: Transport::new(
                [Profile::constant(l(0.5)), Profile::constant(T::one())],
                [
                    Profile::Gaussian { base: T::zero(), amplitude: T::one(), cx: l(0.5), cy: l(0.5), width: l(0.25) },
                    Profile::constant(l(0.8)),
                ],
            ),
        }
    }
}

impl<T: Real> EnzymeSubstrateParams<T> {
    pub fn source(&self) -> T {
        self.m0.unwrap_or_else(|| T::lit(1.05) * self.b[0] * self.e0)
    }

    pub fn problem(&self) -> Result<ProblemSpec<T>> {
        self.transport.validate()?;
        let ([a1, a2], [b1, b2], e0) = (self.a, self.b, self.e0);
        for (n, v) in [("a1", a1), ("a2", a2), ("b1", b1), ("b2", b2), ("e0", e0)] {
            positive(n, v)?;
        }
        let m0 = self.source();
        if !(m0 > b1 * e0) {
            return Err(Error::InvalidParameter("need m0 > b1 * e0".into()));
        }
        if self.transport.data_sup(1) > e0 {
            return Err(Error::InvalidParameter("data of component 2 must not exceed e0".into()));
        }
        // max principle bound of the auxiliary upper solution at time t
        let b0 = self.transport.data_sup(0).max(T::zero());
        let v = move |t: T| b0 + m0 * t;
        let tr = &self.transport;
        let c1 = tr
            .component(0, rf!(|u1, u2| a1 * u1 * u2 - b1 * (e0 - u2)), rf!(|_u1, u2| a1 * u2), rf!(|u1, _u2| a1 * u1 + b1))
            .with_bounds(constant_st(a1 * e0), constant_st(T::zero()), Arc::new(move |_, _, t| a1 * v(t) + b1));
        let c2 = tr
            .component(1, rf!(|u1, u2| a2 * u1 * u2 - b2 * (e0 - u2)), rf!(|u1, _u2| a2 * u1 + b2), rf!(|_u1, u2| a2 * u2))
            .with_bounds(Arc::new(move |_, _, t| a2 * v(t) + b2), constant_st(b2), constant_st(a2 * e0));
        Ok(ProblemSpec::new("enzyme-substrate", QuasiMonotoneClass::Nonincreasing, c1, c2)
            .with_sector(Arc::new(move |_, _, t| ([T::zero(); 2], [v(t), e0]))))
    }
}

/// Pure diffusion with zero data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct ZeroParams<T> {
    pub eps: [T; 2],
}

impl<T: Real> Default for ZeroParams<T> {
    fn default() -> Self {
        ZeroParams { eps: [T::one(); 2] }
    }
}

/// `f_1 = k_1 u_1 - mu_1 u_2`, `f_2 = k_2 u_2 - mu_2 u_1` on the sector `[0, cap]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearCoupledParams<T> {
    pub kappa: [T; 2],
    pub mu: [T; 2],
    pub cap: T,
    #[serde(flatten)]
    pub transport: Transport<T>,
}

impl<T: Real> Default for LinearCoupledParams<T> {
    fn default() -> Self {
        let l = T::lit;
        LinearCoupledParams {
            kappa: [T::one(); 2],
            mu: [l(0.5); 2],
            cap: l(2.0),
            transport: Transport::new(
                [Profile::constant(T::zero()); 2],
                [Profile::SineBump { amplitude: T::one(), lx: T::one(), ly: T::one() }, Profile::constant(T::zero())],
            ),
        }
    }
}

impl<T: Real> LinearCoupledParams<T> {
    pub fn problem(&self) -> Result<ProblemSpec<T>> {
        self.transport.validate()?;
        let ([k1, k2], [m1, m2], cap) = (self.kappa, self.mu, self.cap);
        if m1 < T::zero() || m2 < T::zero() {
            return Err(Error::InvalidParameter("mu must be nonnegative".into()));
        }
        positive("cap", cap)?;
        let tr = &self.transport;
        let c1 = tr
            .component(0, rf!(|u1, u2| k1 * u1 - m1 * u2), rf!(|_u1, _u2| k1), rf!(|_u1, _u2| -m1))
            .with_bounds(constant_st(k1), constant_st(k1), constant_st(m1));
        let c2 = tr
            .component(1, rf!(|u1, u2| k2 * u2 - m2 * u1), rf!(|_u1, _u2| k2), rf!(|_u1, _u2| -m2))
            .with_bounds(constant_st(k2), constant_st(k2), constant_st(m2));
        Ok(ProblemSpec::new("linear-coupled", QuasiMonotoneClass::Nondecreasing, c1, c2)
            .with_sector(Arc::new(move |_, _, _| ([T::zero(); 2], [cap, cap]))))
    }
}

/// Deserialize a params struct as a patch over its `Default`, with the
/// transport fields accepted at the top level.
macro_rules! patch_deserialize {
    ($ty:ident { $($field:ident: $fty:ty),* $(,)? }) => {
        impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for $ty<T> {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
                struct Patch<T> {
                    $(#[serde(default)] $field: Option<$fty>,)*
                    #[serde(default)]
                    eps: Option<[T; 2]>,
                    #[serde(default)]
                    velocity: Option<[[T; 2]; 2]>,
                    #[serde(default)]
                    boundary: Option<[Profile<T>; 2]>,
                    #[serde(default)]
                    initial: Option<[Profile<T>; 2]>,
                }
                let p = Patch::<T>::deserialize(d)?;
                let mut out = Self::default();
                $(if let Some(v) = p.$field { out.$field = v; })*
                let tr = &mut out.transport;
                if let Some(v) = p.eps { tr.eps = v; }
                if let Some(v) = p.velocity { tr.velocity = v; }
                if let Some(v) = p.boundary { tr.boundary = v; }
                if let Some(v) = p.initial { tr.initial = v; }
                Ok(out)
            }
        }
    };
}

patch_deserialize!(GasLiquidParams { sigma: [T; 2], rho1: T, rho2: Option<T> });
patch_deserialize!(BelousovZhabotinskiiParams { a: T, b: T, sigma: [T; 2], k: Option<[T; 2]> });
patch_deserialize!(EnzymeSubstrateParams { a: [T; 2], b: [T; 2], e0: T, m0: Option<T> });
patch_deserialize!(LinearCoupledParams { kappa: [T; 2], mu: [T; 2], cap: T });

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub enum Model<T> {
    GasLiquid(GasLiquidParams<T>),
    VolterraLotka(VolterraLotkaParams<T>),
    BelousovZhabotinskii(BelousovZhabotinskiiParams<T>),
    EnzymeSubstrate(EnzymeSubstrateParams<T>),
    Zero(ZeroParams<T>),
    LinearCoupled(LinearCoupledParams<T>),
}

impl<T: Real> Model<T> {
    /// The four application models with default parameters.
    pub fn bundled() -> [Model<T>; 4] {
        [
            Model::GasLiquid(Default::default()),
            Model::VolterraLotka(Default::default()),
            Model::BelousovZhabotinskii(Default::default()),
            Model::EnzymeSubstrate(Default::default()),
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::GasLiquid(_) => "gas-liquid",
            Model::VolterraLotka(_) => "volterra-lotka",
            Model::BelousovZhabotinskii(_) => "belousov-zhabotinskii",
            Model::EnzymeSubstrate(_) => "enzyme-substrate",
            Model::Zero(_) => "zero",
            Model::LinearCoupled(_) => "linear-coupled",
        }
    }

    pub fn instantiate(&self) -> Result<ProblemSpec<T>> {
        match self {
            Model::GasLiquid(p) => p.problem(),
            Model::VolterraLotka(p) => p.problem(),
            Model::BelousovZhabotinskii(p) => p.problem(),
            Model::EnzymeSubstrate(p) => p.problem(),
            Model::Zero(p) => {
                let z = rf!(|_u1, _u2| T::zero());
                let c = |a: usize| Component::new(p.eps[a], z.clone(), z.clone(), z.clone());
                if !(p.eps[0] > T::zero() && p.eps[1] > T::zero()) {
                    return Err(Error::InvalidParameter("eps must be positive".into()));
                }
                Ok(ProblemSpec::new("zero", QuasiMonotoneClass::Nondecreasing, c(0), c(1))
                    .with_sector(Arc::new(|_, _, _| ([T::zero(); 2], [T::one(); 2]))))
            }
            Model::LinearCoupled(p) => p.problem(),
        }
    }

    pub fn default_bracket(&self, _mesh: &Mesh<T>) -> Result<ConstructionRule<T>> {
        Ok(match self {
            Model::GasLiquid(p) => ConstructionRule::zero_constant(p.rho()),
            Model::VolterraLotka(p) => ConstructionRule::zero_constant(p.caps()),
            Model::BelousovZhabotinskii(p) => ConstructionRule::zero_constant(p.caps()),
            Model::EnzymeSubstrate(p) => ConstructionRule::auxiliary_linear(p.source(), p.e0),
            Model::Zero(_) => ConstructionRule::zero_constant([T::zero(); 2]),
            Model::LinearCoupled(_) => ConstructionRule::zero_linear(None),
        })
    }
}

pub fn instantiate<T: Real>(model: &Model<T>) -> Result<ProblemSpec<T>> {
    model.instantiate()
}

pub fn default_bracket<T: Real>(model: &Model<T>, mesh: &Mesh<T>) -> Result<ConstructionRule<T>> {
    model.default_bracket(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volterra_lotka_caps() {
        let p = VolterraLotkaParams::<f64>::default();
        assert_eq!(p.caps(), [2.0, 2.0]);
    }

    #[test]
    fn enzyme_vanishes_at_full_enzyme() {
        let p = EnzymeSubstrateParams::<f64>::default().problem().unwrap();
        assert_eq!(p.f(0, 0.3, 0.3, 0.5, [0.0, 1.0]), 0.0);
    }

    #[test]
    fn gas_liquid_bounds() {
        let p = GasLiquidParams::<f64> { rho2: Some(1.0), ..Default::default() };
        let prob = p.problem().unwrap();
        assert_eq!((prob.components[0].c_bound)(0.0, 0.0, 0.0), 1.0);
        assert!(prob.df_cross(0, 0.0, 0.0, 0.0, [0.3, 0.5]) <= 0.0);
    }

    #[test]
    fn parameter_checks() {
        let vl = VolterraLotkaParams::<f64> { a: [1.0, 1.5], ..Default::default() };
        assert!(vl.problem().is_err());
        let e = EnzymeSubstrateParams::<f64> { m0: Some(0.4), ..Default::default() };
        assert!(e.problem().is_err());
        let mut g = GasLiquidParams::<f64>::default();
        g.transport.boundary[0] = Profile::constant(2.0);
        assert!(g.problem().is_err());
    }

    #[test]
    fn config_round_trip_names() {
        for m in Model::<f64>::bundled() {
            assert_eq!(m.instantiate().unwrap().name, m.name());
        }
    }

    #[test]
    fn partial_params_keep_defaults() {
        let m: Model<f64> = serde_json::from_str(r#"{"name": "gas-liquid", "rho1": 2.0, "velocity": [[1.0, 0.0], [0.0, -1.0]]}"#).unwrap();
        let Model::GasLiquid(p) = m else { panic!("wrong model") };
        let d = GasLiquidParams::<f64>::default();
        assert_eq!(p.rho1, 2.0);
        assert_eq!(p.sigma, d.sigma);
        assert_eq!(p.transport.boundary, d.transport.boundary);
        assert_eq!(p.transport.velocity[1][1], -1.0);
        assert!(serde_json::from_str::<Model<f64>>(r#"{"name": "gas-liquid", "rho": 2.0}"#).is_err());
        let z: Model<f64> = serde_json::from_str(r#"{"name": "zero"}"#).unwrap();
        assert_eq!(z.name(), "zero");
    }
}
