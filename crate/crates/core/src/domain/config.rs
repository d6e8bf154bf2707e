use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Run parameters. Serialized as one flat JSON object.
///
/// The first block of fields holds the model parameters plus the grid and
/// solver controls; the second block holds discretization knobs that have
/// defaults and may be omitted from config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "E")]
    pub e: f64,
    pub tau: f64,
    pub nu: [f64; 3],
    pub mu: f64,
    pub mu0: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub beta: f64,
    pub n_sphere: usize,
    pub n_lambda_circle: usize,
    pub n_lambda_radial: usize,
    pub n_p: usize,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub ls_tol: f64,
    pub ls_max_iter: usize,
    /// `None` means `0.05 * 2τ√E`.
    #[serde(default)]
    pub p_tube_radius: Option<f64>,

    /// Inner taper radius for restricted mode, as a fraction like `tau`.
    #[serde(default = "defaults::tau0")]
    pub tau0: f64,
    #[serde(default = "defaults::lambda_min")]
    pub lambda_min: f64,
    #[serde(default = "defaults::lambda_max")]
    pub lambda_max: f64,
    #[serde(default = "defaults::eps_t")]
    pub eps_t: f64,
    /// Gauss nodes per φ-window in the bracket quadrature.
    #[serde(default = "defaults::n_phi")]
    pub n_phi: usize,
    /// Coefficient of the second term of the H⁰ cap.
    #[serde(default)]
    pub c7: f64,
    /// Radial nodes of the off-shell Lippmann-Schwinger grid.
    #[serde(default = "defaults::ls_radial")]
    pub ls_radial: usize,
    /// Radial truncation of the off-shell grid; `None` picks it from the
    /// potential's Gaussian decay.
    #[serde(default)]
    pub ls_rmax: Option<f64>,
}

mod defaults {
    pub fn tau0() -> f64 {
        0.3
    }
    pub fn lambda_min() -> f64 {
        0.05
    }
    pub fn lambda_max() -> f64 {
        20.0
    }
    pub fn eps_t() -> f64 {
        0.02
    }
    pub fn n_phi() -> usize {
        24
    }
    pub fn ls_radial() -> usize {
        16
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            e: 4.0,
            tau: 0.5,
            nu: [0.0, 0.0, 1.0],
            mu: 4.0,
            mu0: 2.0,
            alpha: 0.5,
            sigma: 0.5,
            beta: 0.25,
            n_sphere: 14,
            n_lambda_circle: 16,
            n_lambda_radial: 6,
            n_p: 8,
            fp_tol: 1e-10,
            fp_max_iter: 60,
            ls_tol: 1e-10,
            ls_max_iter: 80,
            p_tube_radius: None,
            tau0: defaults::tau0(),
            lambda_min: defaults::lambda_min(),
            lambda_max: defaults::lambda_max(),
            eps_t: defaults::eps_t(),
            n_phi: defaults::n_phi(),
            c7: 0.0,
            ls_radial: defaults::ls_radial(),
            ls_rmax: None,
        }
    }
}

impl RunConfig {
    pub fn nu(&self) -> Vec3 {
        Vec3(self.nu)
    }

    pub fn k0(&self) -> f64 {
        self.e.sqrt()
    }

    /// Radius `2τ√E` of the reconstruction ball.
    pub fn ball_radius(&self) -> f64 {
        2.0 * self.tau * self.k0()
    }

    pub fn tube_radius(&self) -> f64 {
        self.p_tube_radius.unwrap_or(0.05 * self.ball_radius())
    }

    pub fn validate(&self) -> Result<()> {
        let fin = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(name, "not finite"))
            }
        };
        for (n, v) in [
            ("E", self.e),
            ("tau", self.tau),
            ("mu", self.mu),
            ("mu0", self.mu0),
            ("alpha", self.alpha),
            ("sigma", self.sigma),
            ("beta", self.beta),
        ] {
            fin(n, v)?;
        }
        if self.e <= 0.0 {
            return Err(Error::config("E", "must be positive"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::config("tau", "must lie in (0,1)"));
        }
        if !(2.0 <= self.mu0 && self.mu0 <= self.mu) {
            return Err(Error::config("mu0", "need 2 <= mu0 <= mu"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config("alpha", "must lie in (0,1)"));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::config("sigma", "must lie in (0,1)"));
        }
        let bmax = self.alpha.min(self.sigma).min(0.5);
        if !(self.beta > 0.0 && self.beta < bmax) {
            return Err(Error::config("beta", format!("must lie in (0,{bmax})")));
        }
        if (self.nu().norm() - 1.0).abs() > 1e-12 {
            return Err(Error::config("nu", "must be a unit vector"));
        }
        for (n, v) in [
            ("n_sphere", self.n_sphere),
            ("n_lambda_circle", self.n_lambda_circle),
            ("n_lambda_radial", self.n_lambda_radial),
            ("n_p", self.n_p),
            ("n_phi", self.n_phi),
            ("ls_radial", self.ls_radial),
        ] {
            if v < 4 {
                return Err(Error::config(n, "grid resolutions must be >= 4"));
            }
        }
        for (n, v) in [("fp_tol", self.fp_tol), ("ls_tol", self.ls_tol)] {
            if !(v > 0.0) {
                return Err(Error::config(n, "tolerances must be positive"));
            }
        }
        if self.fp_max_iter == 0 || self.ls_max_iter == 0 {
            return Err(Error::config("fp_max_iter", "iteration caps must be positive"));
        }
        if let Some(t) = self.p_tube_radius {
            if !(t >= 0.0 && t < self.ball_radius()) {
                return Err(Error::config("p_tube_radius", "must lie in [0, 2τ√E)"));
            }
        }
        if !(self.tau0 > 0.0 && self.tau0 < self.tau) {
            return Err(Error::config("tau0", "need 0 < tau0 < tau"));
        }
        if !(self.lambda_min > 0.0 && self.lambda_min < 1.0 - self.eps_t) {
            return Err(Error::config("lambda_min", "need 0 < lambda_min < 1 - eps_t"));
        }
        if !(self.eps_t > 0.0 && self.eps_t < 0.5) {
            return Err(Error::config("eps_t", "must lie in (0, 0.5)"));
        }
        if !(self.lambda_max > 1.0 + self.eps_t) {
            return Err(Error::config("lambda_max", "need lambda_max > 1 + eps_t"));
        }
        if self.c7 < 0.0 {
            return Err(Error::config("c7", "must be non-negative"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
