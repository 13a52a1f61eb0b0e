//! The radial operators `D^t_s` and `I^t_s`, Bergman-Besov norms and inner
//! products, the reproducing projection, and the boundary-growth scans for
//! kernel and bracket integrals.
//!
//! `D^t_s` multiplies the degree-`k` part of a harmonic function by
//! `gamma_k(s + t) / gamma_k(s)`, and `I^t_s f(x) = (1 - |x|^2)^t D^t_s f(x)`.
//! Norms are computed against the normalized measures `nu_beta`; the factor
//! `(1 - |x|^2)^beta dnu / V_alpha` equals `(V_beta / V_alpha) d nu_beta`.

use serde::Serialize;

use crate::axisym::AxisymGrid;
use crate::error::{condition, require_in_ball, require_weight, Error, Result};
use crate::fit::{line_fit, log_log_fit, LineFit};
use crate::kernel::{v_alpha, Kernel, KernelCoeffs, KernelConfig, KernelValue};
use crate::polynomial::HarmonicPolynomial;
use crate::quadrature::QuadratureRule;
use crate::vector::{dot, norm_sq};

/// Parameters `(n, p, alpha, s, t)` of a Bergman-Besov space realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceParams {
    pub n: usize,
    pub p: f64,
    pub alpha: f64,
    pub s: f64,
    pub t: f64,
}

impl SpaceParams {
    pub fn new(n: usize, p: f64, alpha: f64, s: f64, t: f64) -> Self {
        SpaceParams { n, p, alpha, s, t }
    }

    /// `alpha + p t > -1`: `I^t_s f` can lie in `L^p_alpha`.
    pub fn flag_norm(&self) -> bool {
        self.alpha + self.p * self.t > -1.0
    }

    /// `alpha + 1 < p (s + 1)`: the projection with kernel `R_s` is bounded.
    pub fn flag_proj(&self) -> bool {
        self.alpha + 1.0 < self.p * (self.s + 1.0)
    }

    /// `n + s + 1 > n max(1, 1/p) + (1 + alpha)/p`.
    pub fn flag_onenorm(&self) -> bool {
        let nf = self.n as f64;
        nf + self.s + 1.0 > nf * (1.0f64).max(1.0 / self.p) + (1.0 + self.alpha) / self.p
    }

    /// Weight exponent of the measure the norm integrates against.
    pub fn norm_weight(&self) -> f64 {
        self.alpha + self.p * self.t
    }

    pub fn require_norm(&self) -> Result<()> {
        if !(self.p > 0.0) {
            return Err(Error::param(condition::POSITIVE, format!("p = {}", self.p)));
        }
        if !self.flag_norm() {
            return Err(Error::param(
                condition::NORM,
                format!(
                    "alpha + p*t = {} + {}*{} = {}",
                    self.alpha,
                    self.p,
                    self.t,
                    self.norm_weight()
                ),
            ));
        }
        Ok(())
    }

    pub fn require_proj(&self) -> Result<()> {
        if !self.flag_proj() {
            return Err(Error::param(
                condition::PROJECTION,
                format!(
                    "alpha + 1 = {} but p*(s + 1) = {}",
                    self.alpha + 1.0,
                    self.p * (self.s + 1.0)
                ),
            ));
        }
        Ok(())
    }

    pub fn require_onenorm(&self) -> Result<()> {
        if !self.flag_onenorm() {
            return Err(Error::param(
                condition::KERNEL_INTEGRABILITY,
                format!(
                    "n = {}, p = {}, alpha = {}, s = {}",
                    self.n, self.p, self.alpha, self.s
                ),
            ));
        }
        Ok(())
    }
}

/// `gamma_k(s + t) / gamma_k(s)` for `k = 0..=max_degree`.
pub fn dts_multipliers(n: usize, s: f64, t: f64, max_degree: usize) -> Vec<f64> {
    let num = KernelCoeffs::new(n, s + t).upto(max_degree);
    let den = KernelCoeffs::new(n, s).upto(max_degree);
    num.iter().zip(&den).map(|(a, b)| a / b).collect()
}

/// `D^t_s f`: each degree-`k` part scaled by `gamma_k(s + t) / gamma_k(s)`.
pub fn dts_apply(s: f64, t: f64, f: &HarmonicPolynomial) -> HarmonicPolynomial {
    let Some(top) = f.max_degree() else {
        return f.clone();
    };
    let m = dts_multipliers(f.n(), s, t, top);
    f.map_degrees(|k| m[k])
}

/// `I^t_s f(x) = (1 - |x|^2)^t D^t_s f(x)`.
pub fn its_apply(s: f64, t: f64, f: &HarmonicPolynomial, x: &[f64]) -> Result<f64> {
    require_in_ball(x, "x")?;
    let Some(top) = f.max_degree() else {
        return Ok(0.0);
    };
    let m = dts_multipliers(f.n(), s, t, top);
    Ok((1.0 - norm_sq(x)).powf(t) * f.evaluate_scaled(x, &m))
}

/// `D^t_s` applied in `y` to the series of `R_s(x, y)`: the degree-`k` terms
/// `gamma_k(s) Z_k(x, y)` are multiplied by `gamma_k(s + t) / gamma_k(s)`.
///
/// Truncation uses the certified bound of the `R_{s+t}` series, whose terms
/// the multiplied terms equal.
pub fn dts_kernel(
    n: usize,
    s: f64,
    t: f64,
    x: &[f64],
    y: &[f64],
    config: KernelConfig,
) -> Result<KernelValue> {
    require_in_ball(x, "x")?;
    require_in_ball(y, "y")?;
    let target = Kernel::new(n, s + t, config);
    let r2 = norm_sq(x) * norm_sq(y);
    let rho = r2.sqrt();
    let mut base = KernelCoeffs::new(n, s);
    let mut shifted = KernelCoeffs::new(n, s + t);
    let terms = target.terms_for(rho, 1.0)?;
    base.ensure(terms);
    shifted.ensure(terms);
    let mut sum = 0.0;
    for (k, z) in crate::kernel::zonal_all(n, terms.saturating_sub(1), x, y)
        .into_iter()
        .enumerate()
    {
        let g = base.get(k);
        let m = shifted.get(k) / g;
        sum += m * (g * z);
    }
    Ok(KernelValue {
        value: sum,
        truncation_bound: target.tail_bound(terms - 1, rho),
        terms_used: terms,
    })
}

fn require_rule_weight(rule: &QuadratureRule, expected: f64) -> Result<()> {
    if (rule.weight_exponent() - expected).abs() > 1e-12 * (1.0 + expected.abs()) {
        return Err(Error::Precondition(format!(
            "quadrature rule integrates against exponent {}, operation needs {}",
            rule.weight_exponent(),
            expected
        )));
    }
    Ok(())
}

/// `||f||_{b^p_alpha} = ((1/V_alpha) int |D^t_s f|^p (1 - |x|^2)^{alpha + p t} dnu)^{1/p}`.
///
/// The rule must integrate against `nu_{alpha + p t}`.
pub fn besov_norm(params: SpaceParams, f: &HarmonicPolynomial, rule: &QuadratureRule) -> Result<f64> {
    params.require_norm()?;
    let w = params.norm_weight();
    require_rule_weight(rule, w)?;
    let Some(top) = f.max_degree() else {
        return Ok(0.0);
    };
    let m = dts_multipliers(f.n(), params.s, params.t, top);
    let p = params.p;
    let integral = rule.integrate(|x| f.evaluate_scaled(x, &m).abs().powf(p));
    let ratio = v_alpha(params.n, w) / v_alpha(params.n, params.alpha);
    Ok((ratio * integral).powf(1.0 / p))
}

/// The pairing `(1/V_alpha) int D^u_s f D^u_s g (1 - |x|^2)^{alpha + 2u} dnu`.
///
/// The rule must integrate against `nu_{alpha + 2u}`.
pub fn inner_product_u(
    alpha: f64,
    s: f64,
    u: f64,
    f: &HarmonicPolynomial,
    g: &HarmonicPolynomial,
    rule: &QuadratureRule,
) -> Result<f64> {
    let phi = alpha + 2.0 * u;
    if !(phi > -1.0) {
        return Err(Error::param(
            condition::NORM,
            format!("alpha + 2u = {alpha} + 2*{u} = {phi}"),
        ));
    }
    require_rule_weight(rule, phi)?;
    let n = f.n();
    let top = f.max_degree().max(g.max_degree());
    let Some(top) = top else {
        return Ok(0.0);
    };
    let m = dts_multipliers(n, s, u, top);
    let integral = rule.integrate(|x| f.evaluate_scaled(x, &m) * g.evaluate_scaled(x, &m));
    Ok(v_alpha(n, phi) / v_alpha(n, alpha) * integral)
}

/// `int R_Phi(x, y) f(y) d nu_Phi(y)` with `Phi = kernel.alpha()`.
///
/// For harmonic polynomials this reproduces `f(x)`.
pub fn project(
    f: &HarmonicPolynomial,
    x: &[f64],
    rule: &QuadratureRule,
    kernel: &Kernel,
) -> Result<f64> {
    let phi = kernel.alpha();
    require_weight(phi, "Phi")?;
    require_rule_weight(rule, phi)?;
    require_in_ball(x, "x")?;
    let rx2 = norm_sq(x);
    rule.try_integrate(|y| {
        let k = kernel.eval_products(dot(x, y), rx2 * norm_sq(y))?;
        Ok(k.value * f.evaluate(y))
    })
}

/// Growth regime of a boundary scan, by the sign of its exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Exponent positive: values grow like `(1 - |x|^2)^{-c}`.
    PowerGrowth,
    /// Exponent zero: values grow like `log 1/(1 - |x|^2)`.
    Logarithmic,
    /// Exponent negative: values stay bounded.
    Bounded,
}

impl Regime {
    pub fn of(c: f64) -> Regime {
        if c > 0.0 {
            Regime::PowerGrowth
        } else if c == 0.0 {
            Regime::Logarithmic
        } else {
            Regime::Bounded
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub radius: f64,
    pub one_minus_r2: f64,
    pub value: f64,
}

/// A boundary scan with its regime diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scan {
    /// The exponent whose sign selects the regime.
    pub exponent: f64,
    pub regime: Regime,
    pub rows: Vec<ScanRow>,
    /// Slope of `log value` against `log(1 - |x|^2)`; compare with `-exponent`.
    pub log_log_slope: Option<f64>,
    /// Fit of `value` against `log 1/(1 - |x|^2)`.
    pub log_growth_slope: Option<f64>,
    pub log_growth_r_squared: Option<f64>,
    /// Largest over smallest value across the scan.
    pub max_min_ratio: f64,
}

impl Scan {
    fn from_rows(exponent: f64, rows: Vec<ScanRow>) -> Scan {
        let w: Vec<f64> = rows.iter().map(|r| r.one_minus_r2).collect();
        let v: Vec<f64> = rows.iter().map(|r| r.value).collect();
        let loglog: Option<LineFit> = log_log_fit(&w, &v);
        let lw: Vec<f64> = w.iter().map(|w| -w.ln()).collect();
        let lin = line_fit(&lw, &v);
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        Scan {
            exponent,
            regime: Regime::of(exponent),
            rows,
            log_log_slope: loglog.map(|f| f.slope),
            log_growth_slope: lin.map(|f| f.slope),
            log_growth_r_squared: lin.map(|f| f.r_squared),
            max_min_ratio: max / min,
        }
    }
}

/// Radii with `1 - r^2` log-spaced over `[w_min, w_max]`.
pub fn log_spaced_radii(w_min: f64, w_max: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let f = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
            let w = (w_max.ln() + f * (w_min.ln() - w_max.ln())).exp();
            (1.0 - w).sqrt()
        })
        .collect()
}

fn check_radii(radii: &[f64]) -> Result<()> {
    for &r in radii {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::param(condition::OPEN_BALL, format!("radius {r}")));
        }
    }
    Ok(())
}

/// `int |R_alpha(x, y)|^p (1 - |y|^2)^beta dnu(y)` at `x = r e_1` for each
/// radius, with exponent `c = p (alpha + n) - (beta + n)`.
pub fn kernel_norm_scan(
    n: usize,
    alpha: f64,
    p: f64,
    beta: f64,
    radii: &[f64],
    config: KernelConfig,
) -> Result<Scan> {
    require_weight(beta, "beta")?;
    check_radii(radii)?;
    let kernel = Kernel::new(n, alpha, config);
    let nf = n as f64;
    let c = p * (alpha + nf) - (beta + nf);
    let mut rows = Vec::with_capacity(radii.len());
    for &r0 in radii {
        let grid = AxisymGrid::graded(n, r0, beta)?;
        let value = grid.try_integrate(|r, ts, out| {
            kernel.eval_axial(r0 * r, ts, out)?;
            out.iter_mut().for_each(|v| *v = v.abs().powf(p));
            Ok(())
        })?;
        rows.push(ScanRow {
            radius: r0,
            one_minus_r2: 1.0 - r0 * r0,
            value,
        });
    }
    Ok(Scan::from_rows(c, rows))
}

/// `int (1 - |y|^2)^beta / [x, y]^{beta + n + s} dnu(y)` at `x = r e_1`.
pub fn bracket_integral_scan(n: usize, beta: f64, s_exp: f64, radii: &[f64]) -> Result<Scan> {
    require_weight(beta, "beta")?;
    check_radii(radii)?;
    let m = beta + n as f64 + s_exp;
    let mut rows = Vec::with_capacity(radii.len());
    for &r0 in radii {
        let grid = AxisymGrid::graded(n, r0, beta)?;
        let value = grid.integrate(|r, ts, out| {
            for (o, t) in out.iter_mut().zip(ts) {
                let b2 = 1.0 - 2.0 * r0 * r * t + r0 * r0 * r * r;
                *o = b2.powf(-0.5 * m);
            }
        });
        rows.push(ScanRow {
            radius: r0,
            one_minus_r2: 1.0 - r0 * r0,
            value,
        });
    }
    Ok(Scan::from_rows(s_exp, rows))
}
