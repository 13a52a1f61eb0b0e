//! Positive measures on the ball (finite atoms plus an optional radial
//! density against `nu`) and the transforms built from them: masses of
//! pseudoballs, averaging functions, Berezin transforms, and the reweighting
//! `d kappa = (1 - |y|^2)^{s + t - alpha} d mu`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::axisym::AxisymGrid;
use crate::error::{condition, require_in_ball, require_weight, Error, Result};
use crate::geometry::{ball_integral, pseudoball, weighted_ball_volume, PseudoBall};
use crate::kernel::{dim_harmonics_f64, radial_moment, v_alpha, Kernel};
use crate::quadrature::gauss_jacobi;
use crate::vector::{norm, norm_sq};

/// Nodes of the radial rule behind [`Density::radial_moment`].
pub const RADIAL_MOMENT_NODES: usize = 64;

/// A point mass `w * delta_x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMass {
    pub x: Vec<f64>,
    pub w: f64,
}

/// Radial density against the normalized volume measure `nu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Density {
    /// `scale * (1 - |y|^2)^exponent dnu(y)`.
    PowerWeight { exponent: f64, scale: f64 },
    /// `scale * g(|y|) * (1 - |y|^2)^exponent dnu(y)` with `g` interpolated
    /// linearly through `(radii, values)` and held constant past the ends.
    TabulatedRadial {
        radii: Vec<f64>,
        values: Vec<f64>,
        scale: f64,
        #[serde(default)]
        exponent: f64,
    },
}

impl Density {
    /// Exponent of the boundary factor `(1 - |y|^2)`.
    pub fn exponent(&self) -> f64 {
        match self {
            Density::PowerWeight { exponent, .. } | Density::TabulatedRadial { exponent, .. } => {
                *exponent
            }
        }
    }

    fn exponent_mut(&mut self) -> &mut f64 {
        match self {
            Density::PowerWeight { exponent, .. } | Density::TabulatedRadial { exponent, .. } => {
                exponent
            }
        }
    }

    pub fn scale(&self) -> f64 {
        match self {
            Density::PowerWeight { scale, .. } | Density::TabulatedRadial { scale, .. } => *scale,
        }
    }

    fn scale_mut(&mut self) -> &mut f64 {
        match self {
            Density::PowerWeight { scale, .. } | Density::TabulatedRadial { scale, .. } => scale,
        }
    }

    /// The factor multiplying `(1 - r^2)^exponent` at radius `r`.
    pub fn smooth(&self, r: f64) -> f64 {
        match self {
            Density::PowerWeight { scale, .. } => *scale,
            Density::TabulatedRadial {
                radii,
                values,
                scale,
                ..
            } => scale * interpolate(radii, values, r),
        }
    }

    /// Density value at squared radius `y2`.
    pub fn at(&self, y2: f64) -> f64 {
        self.smooth(y2.max(0.0).sqrt()) * (1.0 - y2).powf(self.exponent())
    }

    /// `int |y|^{2k} (1 - |y|^2)^extra d(density)`: a Beta integral for power
    /// weights, Gauss-Jacobi in `|y|^2` for tabulated profiles. `+inf` when
    /// the combined boundary exponent is `<= -1`.
    pub fn radial_moment(&self, n: usize, extra: f64, k: usize) -> f64 {
        let beta = self.exponent() + extra;
        if beta <= -1.0 {
            return f64::INFINITY;
        }
        match self {
            Density::PowerWeight { scale, .. } => scale * v_alpha(n, beta) * radial_moment(n, beta, k),
            Density::TabulatedRadial { .. } => {
                let (z, w) = gauss_jacobi(RADIAL_MOMENT_NODES, beta, n as f64 / 2.0 - 1.0)
                    .expect("exponents exceed -1");
                let sum: f64 = z
                    .iter()
                    .zip(&w)
                    .map(|(z, w)| {
                        let u = 0.5 * (1.0 + z);
                        w * u.powi(k as i32) * self.smooth(u.sqrt())
                    })
                    .sum();
                v_alpha(n, beta) * sum
            }
        }
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let i = xs.partition_point(|v| *v <= x) - 1;
    let f = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + f * (ys[i + 1] - ys[i])
}

/// A positive Borel measure: finitely many atoms plus an optional density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Measure {
    pub n: usize,
    #[serde(default)]
    pub atoms: Vec<PointMass>,
    #[serde(default)]
    pub density: Option<Density>,
}

impl Measure {
    pub fn zero(n: usize) -> Self {
        Measure {
            n,
            atoms: vec![],
            density: None,
        }
    }

    /// `nu_alpha = (1 - |y|^2)^alpha dnu / V_alpha`, a probability measure for
    /// `alpha > -1`; for `alpha <= -1` the convention `V_alpha = 1` applies.
    pub fn weighted_volume(n: usize, alpha: f64) -> Self {
        Measure {
            n,
            atoms: vec![],
            density: Some(Density::PowerWeight {
                exponent: alpha,
                scale: 1.0 / v_alpha(n, alpha),
            }),
        }
    }

    /// `scale * (1 - |y|^2)^exponent dnu`.
    pub fn power_weight(n: usize, exponent: f64, scale: f64) -> Self {
        Measure {
            n,
            atoms: vec![],
            density: Some(Density::PowerWeight { exponent, scale }),
        }
    }

    pub fn atoms(n: usize, atoms: Vec<(Vec<f64>, f64)>) -> Self {
        Measure {
            n,
            atoms: atoms.into_iter().map(|(x, w)| PointMass { x, w }).collect(),
            density: None,
        }
    }

    /// Checks the structural invariants; errors carry a JSON pointer.
    pub fn validate(&self) -> Result<()> {
        let schema = |pointer: String, message: String| Error::Schema { pointer, message };
        if self.n < 2 {
            return Err(schema("/n".into(), format!("dimension must be at least 2, got {}", self.n)));
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if a.x.len() != self.n {
                return Err(schema(
                    format!("/atoms/{i}/x"),
                    format!("expected {} coordinates, got {}", self.n, a.x.len()),
                ));
            }
            if !(norm_sq(&a.x) < 1.0) || a.x.iter().any(|v| !v.is_finite()) {
                return Err(schema(
                    format!("/atoms/{i}/x"),
                    format!("atom must lie in the open unit ball, |x| = {}", norm(&a.x)),
                ));
            }
            if !(a.w > 0.0 && a.w.is_finite()) {
                return Err(schema(format!("/atoms/{i}/w"), format!("weight must be positive, got {}", a.w)));
            }
        }
        if let Some(d) = &self.density {
            if !(d.scale() > 0.0 && d.scale().is_finite()) {
                return Err(schema("/density/scale".into(), format!("scale must be positive, got {}", d.scale())));
            }
            if !d.exponent().is_finite() {
                return Err(schema("/density/exponent".into(), "exponent must be finite".into()));
            }
            if let Density::TabulatedRadial { radii, values, .. } = d {
                if radii.len() < 2 || radii.len() != values.len() {
                    return Err(schema(
                        "/density/values".into(),
                        format!("need at least two radii and as many values, got {} and {}", radii.len(), values.len()),
                    ));
                }
                if radii.windows(2).any(|w| !(w[0] < w[1])) || radii[0] < 0.0 || radii[radii.len() - 1] > 1.0 {
                    return Err(schema(
                        "/density/radii".into(),
                        "radii must increase strictly within [0, 1]".into(),
                    ));
                }
                if let Some(i) = values.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(schema(format!("/density/values/{i}"), "values must be nonnegative".into()));
                }
            }
        }
        Ok(())
    }

    /// Parses and validates a measure document.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let m: Measure = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            pointer: json_pointer(&e.path().to_string()),
            message: e.inner().to_string(),
        })?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("measure serializes")
    }

    /// SHA-256 of the compact JSON form.
    pub fn fingerprint(&self) -> String {
        let text = serde_json::to_string(self).expect("measure serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    /// Total mass of the atomic part.
    pub fn atomic_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    pub fn is_radial(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `c * mu`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut m = self.clone();
        m.atoms.iter_mut().for_each(|a| a.w *= c);
        if let Some(d) = &mut m.density {
            *d.scale_mut() *= c;
        }
        m
    }

    /// Largest atom radius, or 0 with no atoms.
    pub fn support_radius(&self) -> f64 {
        self.atoms.iter().map(|a| norm(&a.x)).fold(0.0, f64::max)
    }

    /// `int F(y) dmu_density(y)` for `F` axisymmetric about `axis`, peaked
    /// near `r0 * axis`; `extra` is an additional boundary exponent applied to
    /// the density. Returns `+inf` when the combined exponent is `<= -1`.
    fn density_axial<F>(&self, r0: f64, extra: f64, f: F) -> Result<f64>
    where
        F: Fn(f64, &[f64], &mut [f64]) -> Result<()> + Sync,
    {
        let Some(d) = &self.density else {
            return Ok(0.0);
        };
        let beta = d.exponent() + extra;
        if beta <= -1.0 {
            return Ok(f64::INFINITY);
        }
        let grid = AxisymGrid::graded(self.n, r0, beta)?;
        grid.try_integrate(|r, ts, out| {
            f(r, ts, out)?;
            let g = d.smooth(r);
            out.iter_mut().for_each(|v| *v *= g);
            Ok(())
        })
    }
}

pub(crate) fn json_pointer(path: &str) -> String {
    if path == "." || path.is_empty() {
        return "/".into();
    }
    let mut out = String::new();
    for seg in path.split('.') {
        let mut rest = seg;
        while let Some(open) = rest.find('[') {
            let head = &rest[..open];
            if !head.is_empty() {
                out.push('/');
                out.push_str(head);
            }
            let close = rest[open..].find(']').map(|c| c + open).unwrap_or(rest.len());
            out.push('/');
            out.push_str(&rest[open + 1..close]);
            rest = &rest[(close + 1).min(rest.len())..];
        }
        if !rest.is_empty() {
            out.push('/');
            out.push_str(rest);
        }
    }
    out
}

/// `mu(E)`: exact atom sum plus quadrature of the density over the ball.
pub fn measure_of_pseudoball(mu: &Measure, ball: &PseudoBall, grid: &AxisymGrid) -> f64 {
    let atoms: f64 = mu.atoms.iter().filter(|a| ball.contains(&a.x)).map(|a| a.w).sum();
    let dens = match &mu.density {
        Some(d) => ball_integral(ball, grid, |y2| d.at(y2)),
        None => 0.0,
    };
    atoms + dens
}

/// Averaging function `mu(E_delta(x)) / nu_alpha(E_delta(x))`.
pub fn averaging(mu: &Measure, alpha: f64, delta: f64, x: &[f64], grid: &AxisymGrid) -> Result<f64> {
    require_weight(alpha, "alpha")?;
    let ball = pseudoball(x, delta)?;
    Ok(measure_of_pseudoball(mu, &ball, grid) / weighted_ball_volume(alpha, &ball, grid))
}

/// `int R_Phi(x, y)^2 / ||R_Phi(x, .)||^2 (1 - |y|^2)^{Phi - alpha} dmu(y)`
/// with `Phi = kernel.alpha()` and the normalizer `R_Phi(x, x)`.
pub fn berezin2(mu: &Measure, alpha: f64, x: &[f64], kernel: &Kernel) -> Result<f64> {
    let phi = kernel.alpha();
    require_weight(phi, "Phi")?;
    require_in_ball(x, "x")?;
    let norm2 = kernel.eval(x, x)?.value;
    let shift = phi - alpha;
    let mut atoms = 0.0;
    for a in &mu.atoms {
        let r = kernel.eval(x, &a.x)?.value;
        atoms += a.w * r * r * (1.0 - norm_sq(&a.x)).powf(shift);
    }
    let r0 = norm(x);
    let dens = mu.density_axial(r0, shift, |r, ts, out| {
        kernel.eval_axial(r0 * r, ts, out)?;
        out.iter_mut().for_each(|v| *v *= *v);
        Ok(())
    })?;
    Ok((atoms + dens) / norm2)
}

/// [`berezin2`] with the normalizer `R_Phi(x, x)` supplied by the caller and a
/// power-weight density summed by orthogonality of spherical harmonics:
/// `int R_Phi(x, y)^2 (1 - |y|^2)^b dnu = V_b sum_k gamma_k^2 h_k |x|^{2k} m_b(k)`
/// with `m_b(k) = int r^{2k} dnu_b`. Tabulated densities fall back to the
/// grid integral.
pub fn berezin2_expanded(mu: &Measure, alpha: f64, x: &[f64], kernel: &Kernel, diag: f64) -> Result<f64> {
    let phi = kernel.alpha();
    let shift = phi - alpha;
    let mut atoms = 0.0;
    for a in &mu.atoms {
        let r = kernel.eval(x, &a.x)?.value;
        atoms += a.w * r * r * (1.0 - norm_sq(&a.x)).powf(shift);
    }
    let dens = match &mu.density {
        None => 0.0,
        Some(Density::PowerWeight { exponent, scale }) => {
            let b = exponent + shift;
            if b <= -1.0 {
                f64::INFINITY
            } else {
                scale * v_alpha(mu.n, b) * kernel_square_series(kernel, norm_sq(x), b)?
            }
        }
        Some(Density::TabulatedRadial { .. }) => {
            let r0 = norm(x);
            mu.density_axial(r0, shift, |r, ts, out| {
                kernel.eval_axial(r0 * r, ts, out)?;
                out.iter_mut().for_each(|v| *v *= *v);
                Ok(())
            })?
        }
    };
    Ok((atoms + dens) / diag)
}

/// `sum_k gamma_k^2 h_k x2^k m_b(k)`, summed until a geometric tail bound
/// drops below `1e-14` of the partial sum.
fn kernel_square_series(kernel: &Kernel, x2: f64, b: f64) -> Result<f64> {
    let n = kernel.n();
    let half = n as f64 / 2.0;
    let max = kernel.config().max_terms;
    let (mut sum, mut moment, mut power) = (0.0, 1.0, 1.0);
    let mut prev = f64::NAN;
    for k in 0..max {
        let g = kernel.gamma(k);
        let term = g * g * dim_harmonics_f64(n, k) * power * moment;
        sum += term;
        if k > 0 && term > 0.0 {
            let q = (term / prev).max(x2);
            if q < 1.0 && term * q / (1.0 - q) <= 1e-14 * sum.abs() {
                return Ok(sum);
            }
        }
        if term == 0.0 && x2 == 0.0 {
            return Ok(sum);
        }
        prev = term;
        power *= x2;
        moment *= (half + k as f64) / (half + b + 1.0 + k as f64);
    }
    Err(Error::Truncation {
        terms: max,
        achieved: f64::NAN,
        target: 1e-14,
    })
}

/// Quadrature value of `||R_Phi(x, .)||^2_{L^2_Phi}`, for comparison with
/// the reproducing identity `R_Phi(x, x)`.
pub fn kernel_norm_sq_quadrature(kernel: &Kernel, x: &[f64]) -> Result<f64> {
    let phi = kernel.alpha();
    require_weight(phi, "Phi")?;
    require_in_ball(x, "x")?;
    kernel_power_integral(kernel, x, 2.0, phi)
}

/// `(1 / V_beta) int |R(x, y)|^p (1 - |y|^2)^beta dnu(y)`.
pub fn kernel_power_integral(kernel: &Kernel, x: &[f64], p: f64, beta: f64) -> Result<f64> {
    let r0 = norm(x);
    let grid = AxisymGrid::graded(kernel.n(), r0, beta)?;
    let v = grid.try_integrate(|r, ts, out| {
        kernel.eval_axial(r0 * r, ts, out)?;
        out.iter_mut().for_each(|v| *v = v.abs().powf(p));
        Ok(())
    })?;
    Ok(v / v_alpha(kernel.n(), beta))
}

/// `int |R_alpha(x, y)|^t / ||R_alpha(x, .)||^t_{L^t_alpha} dmu(y)` with
/// `alpha = kernel.alpha()`; the normalizer is computed by quadrature.
pub fn berezin_t(mu: &Measure, t_exp: f64, x: &[f64], kernel: &Kernel) -> Result<f64> {
    let alpha = kernel.alpha();
    require_weight(alpha, "alpha")?;
    require_in_ball(x, "x")?;
    if !(t_exp > 1.0) {
        return Err(Error::param(condition::POSITIVE, format!("Berezin exponent t must exceed 1, got {t_exp}")));
    }
    let normalizer = kernel_power_integral(kernel, x, t_exp, alpha)?;
    let mut atoms = 0.0;
    for a in &mu.atoms {
        atoms += a.w * kernel.eval(x, &a.x)?.value.abs().powf(t_exp);
    }
    let r0 = norm(x);
    let dens = mu.density_axial(r0, 0.0, |r, ts, out| {
        kernel.eval_axial(r0 * r, ts, out)?;
        out.iter_mut().for_each(|v| *v = v.abs().powf(t_exp));
        Ok(())
    })?;
    Ok((atoms + dens) / normalizer)
}

/// `(1 - |x|^2)^s int [x, y]^{-(alpha + n + s)} dmu(y)`.
pub fn berezin_type(mu: &Measure, alpha: f64, s_exp: f64, x: &[f64]) -> Result<f64> {
    require_weight(alpha, "alpha")?;
    require_in_ball(x, "x")?;
    if !(s_exp > 0.0) {
        return Err(Error::param(condition::POSITIVE, format!("s = {s_exp}")));
    }
    let m = alpha + mu.n as f64 + s_exp;
    let x2 = norm_sq(x);
    let mut atoms = 0.0;
    for a in &mu.atoms {
        let b2 = 1.0 - 2.0 * crate::vector::dot(x, &a.x) + x2 * norm_sq(&a.x);
        atoms += a.w * b2.powf(-0.5 * m);
    }
    let r0 = x2.sqrt();
    let dens = mu.density_axial(r0, 0.0, |r, ts, out| {
        for (o, t) in out.iter_mut().zip(ts) {
            *o = (1.0 - 2.0 * r0 * r * t + r0 * r0 * r * r).powf(-0.5 * m);
        }
        Ok(())
    })?;
    Ok((1.0 - x2).powf(s_exp) * (atoms + dens))
}

/// `d kappa = (1 - |y|^2)^{s + t - alpha} d mu`.
pub fn kappa_from_mu(mu: &Measure, s: f64, t: f64, alpha: f64) -> Measure {
    let shift = s + t - alpha;
    let mut k = mu.clone();
    if shift == 0.0 {
        return k;
    }
    for a in &mut k.atoms {
        a.w *= (1.0 - norm_sq(&a.x)).powf(shift);
    }
    if let Some(d) = &mut k.density {
        *d.exponent_mut() += shift;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ball_grid;
    use crate::kernel::KernelConfig;
    use approx::assert_relative_eq;

    #[test]
    fn json_roundtrip_and_schema() {
        let m = Measure {
            n: 2,
            atoms: vec![PointMass { x: vec![0.1, 0.2], w: 0.5 }],
            density: Some(Density::PowerWeight { exponent: 1.0, scale: 2.0 }),
        };
        let text = m.to_json();
        assert!(text.contains("\"kind\": \"power-weight\""));
        assert_eq!(Measure::from_json(&text).unwrap(), m);
        let none = Measure::from_json(r#"{"n": 3, "atoms": [], "density": null}"#).unwrap();
        assert_eq!(none, Measure::zero(3));
    }

    #[test]
    fn schema_errors_carry_pointers() {
        let bad = r#"{"n": 2, "atoms": [{"x": [0.1, 0.2], "w": "heavy"}], "density": null}"#;
        match Measure::from_json(bad) {
            Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, "/atoms/0/w"),
            other => panic!("unexpected {other:?}"),
        }
        let outside = r#"{"n": 2, "atoms": [{"x": [0.1, 0.2]}, {"x": [1.0, 0.0], "w": 1}]}"#;
        assert!(matches!(Measure::from_json(outside), Err(Error::Schema { .. })));
        let outside = r#"{"n": 2, "atoms": [{"x": [0.1, 0.2], "w": 1}, {"x": [1.0, 0.0], "w": 1}]}"#;
        match Measure::from_json(outside) {
            Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, "/atoms/1/x"),
            other => panic!("unexpected {other:?}"),
        }
        let kind = r#"{"n": 2, "density": {"kind": "gaussian", "scale": 1}}"#;
        match Measure::from_json(kind) {
            Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, "/density/kind"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pointer_conversion() {
        assert_eq!(json_pointer("atoms[3].x[1]"), "/atoms/3/x/1");
        assert_eq!(json_pointer("density.scale"), "/density/scale");
        assert_eq!(json_pointer("."), "/");
    }

    #[test]
    fn fingerprint_is_stable() {
        let a = Measure::weighted_volume(2, 1.0);
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
        assert_ne!(a.fingerprint(), a.scaled(2.0).fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }

    #[test]
    fn pseudoball_masses() {
        let g = ball_grid(2);
        let ball = pseudoball(&[0.5, 0.0], 0.5).unwrap();
        let atom = Measure::atoms(2, vec![(vec![0.45, 0.05], 2.0), (vec![-0.5, 0.0], 3.0)]);
        assert_eq!(measure_of_pseudoball(&atom, &ball, &g), 2.0);
        assert_eq!(measure_of_pseudoball(&Measure::zero(2), &ball, &g), 0.0);
        let nu = Measure::weighted_volume(2, 1.5);
        assert_relative_eq!(
            measure_of_pseudoball(&nu, &ball, &g),
            weighted_ball_volume(1.5, &ball, &g),
            max_relative = 1e-10
        );
    }

    #[test]
    fn averaging_cases() {
        let g = ball_grid(3);
        let x = [0.3, 0.5, -0.2];
        let nu = Measure::weighted_volume(3, 0.7);
        assert!((averaging(&nu, 0.7, 0.4, &x, &g).unwrap() - 1.0).abs() < 1e-9);
        let atom = Measure::atoms(3, vec![(x.to_vec(), 2.0)]);
        let ball = pseudoball(&x, 0.4).unwrap();
        assert_relative_eq!(
            averaging(&atom, 0.7, 0.4, &x, &g).unwrap(),
            2.0 / weighted_ball_volume(0.7, &ball, &g),
            max_relative = 1e-14
        );
        let far = Measure::atoms(3, vec![(vec![-0.5, 0.0, 0.0], 2.0)]);
        assert_eq!(averaging(&far, 0.7, 0.4, &x, &g).unwrap(), 0.0);
    }

    #[test]
    fn berezin2_cases() {
        let (alpha, phi) = (0.5, 1.5);
        let kernel = Kernel::new(2, phi, KernelConfig::default());
        let x = [0.6, -0.3];
        let nu = Measure::weighted_volume(2, alpha);
        let v = berezin2(&nu, alpha, &x, &kernel).unwrap();
        assert_relative_eq!(v, v_alpha(2, phi) / v_alpha(2, alpha), max_relative = 1e-6);
        let atom = Measure::atoms(2, vec![(vec![0.0, 0.0], 3.0)]);
        let rxx = kernel.eval(&x, &x).unwrap().value;
        assert_relative_eq!(berezin2(&atom, alpha, &x, &kernel).unwrap(), 3.0 / rxx, max_relative = 1e-14);
        assert_eq!(berezin2(&atom, alpha, &[0.0, 0.0], &kernel).unwrap(), 3.0);
        let q = kernel_norm_sq_quadrature(&kernel, &x).unwrap();
        assert_relative_eq!(q, rxx, max_relative = 1e-6);
    }

    #[test]
    fn expanded_berezin_matches_grid() {
        let (alpha, phi) = (0.0, 1.0);
        let kernel = Kernel::new(2, phi, KernelConfig::default());
        let x = [0.7, 0.2];
        let diag = kernel.eval(&x, &x).unwrap().value;
        let mut mu = Measure::power_weight(2, 0.5, 3.0);
        mu.atoms.push(PointMass { x: vec![-0.3, 0.1], w: 0.4 });
        let a = berezin2(&mu, alpha, &x, &kernel).unwrap();
        let b = berezin2_expanded(&mu, alpha, &x, &kernel, diag).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-8);
        let nu = Measure::weighted_volume(2, alpha);
        let c = berezin2_expanded(&nu, alpha, &x, &kernel, diag).unwrap();
        assert_relative_eq!(c, v_alpha(2, phi) / v_alpha(2, alpha), max_relative = 1e-10);
    }

    #[test]
    fn berezin_t_and_type_cases() {
        let alpha = 0.0;
        let kernel = Kernel::new(3, alpha, KernelConfig::default());
        let x = [0.2, 0.3, 0.1];
        let atom = Measure::atoms(3, vec![(vec![0.0; 3], 2.0)]);
        let norm_t = kernel_power_integral(&kernel, &x, 3.0, alpha).unwrap();
        assert_relative_eq!(berezin_t(&atom, 3.0, &x, &kernel).unwrap(), 2.0 / norm_t, max_relative = 1e-14);
        assert_eq!(berezin_t(&Measure::zero(3), 3.0, &x, &kernel).unwrap(), 0.0);
        let x2 = norm_sq(&x);
        assert_relative_eq!(berezin_type(&atom, alpha, 1.5, &x).unwrap(), 2.0 * (1.0 - x2).powf(1.5), max_relative = 1e-14);
        let self_atom = Measure::atoms(3, vec![(x.to_vec(), 2.0)]);
        let expected = 2.0 * (1.0 - x2).powf(1.5) / (1.0 - x2).powf(alpha + 3.0 + 1.5);
        assert_relative_eq!(berezin_type(&self_atom, alpha, 1.5, &x).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn kappa_bookkeeping() {
        let atom = Measure::atoms(2, vec![(vec![0.6, 0.0], 2.0)]);
        assert_eq!(kappa_from_mu(&atom, 1.0, 0.5, 1.5), atom);
        let k = kappa_from_mu(&atom, 1.0, 1.0, 0.5);
        assert_relative_eq!(k.atoms[0].w, 2.0 * 0.64f64.powf(1.5), max_relative = 1e-14);
        let nu = Measure::weighted_volume(2, 0.5);
        let k = kappa_from_mu(&nu, 1.0, 1.0, 0.5);
        // (V_{s+t}/V_alpha) nu_{s+t}: exponent s + t, scale 1/V_alpha
        let d = k.density.unwrap();
        assert_eq!(d.exponent(), 2.0);
        assert_relative_eq!(d.scale(), 1.0 / v_alpha(2, 0.5), max_relative = 1e-15);
    }

    #[test]
    fn tabulated_density_interpolates() {
        let d = Density::TabulatedRadial {
            radii: vec![0.0, 0.5, 1.0],
            values: vec![1.0, 3.0, 3.0],
            scale: 2.0,
            exponent: 0.0,
        };
        assert_eq!(d.smooth(0.25), 4.0);
        assert_eq!(d.smooth(0.9), 6.0);
        // constant tabulation equals the power weight with the same scale
        let flat = Measure {
            n: 2,
            atoms: vec![],
            density: Some(Density::TabulatedRadial {
                radii: vec![0.0, 1.0],
                values: vec![1.0, 1.0],
                scale: 1.0,
                exponent: 1.0,
            }),
        };
        let pw = Measure::power_weight(2, 1.0, 1.0);
        let x = [0.4, 0.1];
        let a = berezin_type(&flat, 0.0, 1.0, &x).unwrap();
        let b = berezin_type(&pw, 0.0, 1.0, &x).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-13);
    }
}
