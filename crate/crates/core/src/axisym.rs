//! Integration of functions on the ball that depend only on `|y|` and the
//! angle between `y` and a fixed axis.
//!
//! With `t = cos(theta)` the normalized volume measure factors as
//! `d nu(y) = n r^{n-1} dr * c_n sin^{n-2}(theta) d theta`, where
//! `c_n = Gamma(n/2) / (sqrt(pi) Gamma((n-1)/2))`. The graded grid refines
//! geometrically toward `r = 1`, around a chosen radius `r0` and toward
//! `theta = 0`, which is where integrands built from `R(x, y)` or
//! `[x, y]^{-m}` with `x = r0 e_1` concentrate.

use std::f64::consts::PI;

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_jacobi, gauss_legendre};

/// Gauss-Legendre nodes per panel on graded grids.
pub const PANEL_NODES: usize = 16;

/// `c_n`, the density of the polar angle on `S^{n-1}`.
pub fn sphere_angle_constant(n: usize) -> f64 {
    if n == 2 {
        return 1.0 / PI;
    }
    let nf = n as f64;
    (ln_gamma(nf / 2.0) - 0.5 * PI.ln() - ln_gamma((nf - 1.0) / 2.0)).exp()
}

#[derive(Debug, Clone)]
pub struct AxisymGrid {
    n: usize,
    r: Vec<f64>,
    wr: Vec<f64>,
    t: Vec<f64>,
    wt: Vec<f64>,
}

impl AxisymGrid {
    /// One Gauss-Legendre panel in `r` and one in `theta`; suited to smooth
    /// integrands such as those over a pseudohyperbolic ball mapped to `B`.
    pub fn uniform(n: usize, m_r: usize, m_theta: usize) -> Self {
        let (r, wr) = radial_panels(n, &[0.0, 1.0], m_r);
        let (t, wt) = angular_panels(n, &[0.0, PI], m_theta);
        AxisymGrid { n, r, wr, t, wt }
    }

    /// Grid for integrands peaked at `r0 e_1`, with the factor
    /// `(1 - r^2)^beta` folded into the radial weights. The last radial panel
    /// uses a Gauss-Jacobi rule so the boundary singularity is integrated
    /// exactly for `beta > -1`.
    pub fn graded(n: usize, r0: f64, beta: f64) -> Result<Self> {
        if !(beta > -1.0) {
            return Err(Error::Domain(format!(
                "radial weight exponent must exceed -1, got {beta}"
            )));
        }
        if !(0.0..1.0).contains(&r0) {
            return Err(Error::Domain(format!("peak radius must lie in [0, 1), got {r0}")));
        }
        let gap = 1.0 - r0;
        let depth = ((1.0 / gap).log2().ceil() as i32 + 8).clamp(8, 50);
        let mut br = vec![0.0];
        for j in 1..=depth {
            br.push(1.0 - 0.5f64.powi(j));
        }
        for j in 0..5 {
            let d = gap * 0.5f64.powi(j);
            br.push(r0 + d);
            br.push(r0 - d);
        }
        br.push(r0);
        let br = clean_breaks(br, 0.0, 1.0 - 0.5f64.powi(depth));
        let (mut r, mut wr) = radial_panels(n, &br, PANEL_NODES);
        for (ri, wi) in r.iter().zip(wr.iter_mut()) {
            *wi *= (1.0 - ri * ri).powf(beta);
        }
        // last panel [a, 1] with (1 - r)^beta handled by the rule
        let a = *br.last().expect("nonempty breaks");
        let (z, w) = gauss_jacobi(PANEL_NODES, beta, 0.0)?;
        let mass = (1.0 - a).powf(beta + 1.0) / (beta + 1.0);
        let nf = n as f64;
        for (z, w) in z.iter().zip(&w) {
            let ri = a + 0.5 * (1.0 - a) * (1.0 + z);
            r.push(ri);
            wr.push(w * mass * (1.0 + ri).powf(beta) * nf * ri.powi(n as i32 - 1));
        }

        let theta_min = (gap * 0.5f64.powi(6)).max(1e-12);
        let mut bt = vec![0.0, PI];
        let mut th = theta_min;
        while th < PI / 2.0 {
            bt.push(th);
            th *= 2.0;
        }
        bt.push(PI / 2.0);
        let bt = clean_breaks(bt, 0.0, PI);
        let (t, wt) = angular_panels(n, &bt, PANEL_NODES);
        Ok(AxisymGrid { n, r, wr, t, wt })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Cosines of the angular nodes.
    pub fn cosines(&self) -> &[f64] {
        &self.t
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len() * self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `int_B F d nu` where `f(r, ts, out)` writes `F` at radius `r` for every
    /// cosine in `ts`. Radii are processed in parallel; partial sums are
    /// combined in radius order.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(f64, &[f64], &mut [f64]) + Sync,
    {
        let per_radius: Vec<f64> = (0..self.r.len())
            .into_par_iter()
            .map_init(
                || vec![0.0; self.t.len()],
                |out, i| {
                    f(self.r[i], &self.t, out);
                    let s: f64 = out.iter().zip(&self.wt).map(|(v, w)| v * w).sum();
                    self.wr[i] * s
                },
            )
            .collect();
        per_radius.iter().sum()
    }

    /// Radial weights, with any `(1 - r^2)^beta` factor already folded in.
    pub fn radial_weights(&self) -> &[f64] {
        &self.wr
    }

    /// Angular averages `A(r_i) = sum_j wt_j F(r_i, t_j)` at every radius, so
    /// that `int F h(|y|) d nu = sum_i wr_i h(r_i) A(r_i)` for any radial `h`.
    pub fn angular_profile<F>(&self, f: F) -> Result<Vec<f64>>
    where
        F: Fn(f64, &[f64], &mut [f64]) -> Result<()> + Sync,
    {
        (0..self.r.len())
            .into_par_iter()
            .map_init(
                || vec![0.0; self.t.len()],
                |out, i| {
                    f(self.r[i], &self.t, out)?;
                    Ok(out.iter().zip(&self.wt).map(|(v, w)| v * w).sum())
                },
            )
            .collect()
    }

    /// Like [`AxisymGrid::integrate`] but for a fallible integrand.
    pub fn try_integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(f64, &[f64], &mut [f64]) -> Result<()> + Sync,
    {
        let per_radius: Result<Vec<f64>> = (0..self.r.len())
            .into_par_iter()
            .map_init(
                || vec![0.0; self.t.len()],
                |out, i| {
                    f(self.r[i], &self.t, out)?;
                    let s: f64 = out.iter().zip(&self.wt).map(|(v, w)| v * w).sum();
                    Ok(self.wr[i] * s)
                },
            )
            .collect();
        Ok(per_radius?.iter().sum())
    }
}

fn clean_breaks(mut b: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    b.retain(|v| *v >= lo && *v <= hi);
    b.push(lo);
    b.push(hi);
    b.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(b.len());
    for v in b {
        if out.last().is_none_or(|l| v - l > 1e-14 * (1.0 + v.abs())) {
            out.push(v);
        }
    }
    out
}

fn radial_panels(n: usize, breaks: &[f64], m: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let mut r = Vec::new();
    let mut w = Vec::new();
    for pair in breaks.windows(2) {
        let (x, wx) = gauss_legendre(m, pair[0], pair[1]);
        for (xi, wi) in x.into_iter().zip(wx) {
            w.push(wi * nf * xi.powi(n as i32 - 1));
            r.push(xi);
        }
    }
    (r, w)
}

fn angular_panels(n: usize, breaks: &[f64], m: usize) -> (Vec<f64>, Vec<f64>) {
    let c = sphere_angle_constant(n);
    let mut t = Vec::new();
    let mut w = Vec::new();
    for pair in breaks.windows(2) {
        let (x, wx) = gauss_legendre(m, pair[0], pair[1]);
        for (th, wi) in x.into_iter().zip(wx) {
            t.push(th.cos());
            w.push(c * wi * th.sin().powi(n as i32 - 2));
        }
    }
    (t, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{radial_moment, v_alpha};
    use approx::assert_relative_eq;

    #[test]
    fn angle_density_normalized() {
        for n in 2..8 {
            let g = AxisymGrid::uniform(n, 4, 24);
            let total: f64 = g.wt.iter().sum();
            assert_relative_eq!(total, 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn uniform_volume_and_moments() {
        for n in 2..6 {
            let g = AxisymGrid::uniform(n, 20, 20);
            assert_relative_eq!(g.integrate(|_, _, o| o.fill(1.0)), 1.0, max_relative = 1e-13);
            // int t^2 r^2 d nu = int x_1^2 d nu = 1/(n + 2)
            let v = g.integrate(|r, ts, o| {
                for (oi, t) in o.iter_mut().zip(ts) {
                    *oi = r * r * t * t;
                }
            });
            assert_relative_eq!(v, 1.0 / (n as f64 + 2.0), max_relative = 1e-12);
        }
    }

    #[test]
    fn graded_weight_integrates_singular_boundary() {
        for n in [2, 3] {
            for beta in [-0.6, 0.0, 1.5] {
                let g = AxisymGrid::graded(n, 0.99, beta).unwrap();
                let v = g.integrate(|_, _, o| o.fill(1.0));
                assert_relative_eq!(v, v_alpha(n, beta), max_relative = 1e-11);
                let m2 = g.integrate(|r, _, o| o.fill(r.powi(4)));
                assert_relative_eq!(m2, v_alpha(n, beta) * radial_moment(n, beta, 2), max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn graded_rejects_bad_inputs() {
        assert!(AxisymGrid::graded(2, 0.5, -1.0).is_err());
        assert!(AxisymGrid::graded(2, 1.0, 0.0).is_err());
    }
}
