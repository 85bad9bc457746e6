//! Parameter sets behind each published figure.
//!
//! Where a figure leaves a value open (the CRRA exponent for most figures,
//! beta for the asymptotic-ratio figures, the initial state) the choice made
//! here is noted on the preset.

use crate::error::{Error, Result};
use crate::model::{kappa_roots, BenchmarkParams, MarketParams, ModelParams, Preferences};

/// The twelve named model presets.
pub const PRESET_IDS: [&str; 12] =
    ["fig1", "fig2a", "fig2b", "fig3a", "fig3b", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10"];

/// Additional panel ids accepted by [`preset`].
pub const PANEL_IDS: [&str; 4] = ["fig7a", "fig7b", "fig8a", "fig8b"];

#[allow(clippy::too_many_arguments)]
fn scalar(mu: f64, sigma: f64, mu_z: f64, sigma_z: f64, rho: f64, p: f64, beta: f64, v0: f64, z0: f64) -> ModelParams {
    ModelParams {
        market: MarketParams::scalar(mu, sigma),
        benchmark: BenchmarkParams::scalar(mu_z, sigma_z),
        preferences: Preferences { rho, p, beta, v0, z0 },
    }
}

/// p1 = -kappa/(1-kappa) for a one-asset market; kappa does not depend on p.
pub fn critical_p(mu: f64, sigma: f64, mu_z: f64, sigma_z: f64, rho: f64) -> f64 {
    let lam = mu / sigma;
    let (kappa, _) = kappa_roots(0.5 * lam * lam, sigma_z * lam, rho, mu_z).expect("valid preset");
    -kappa / (1.0 - kappa)
}

pub fn preset(id: &str) -> Result<ModelParams> {
    Ok(match id {
        // p is the critical exponent itself, about -2.6357
        "fig1" => scalar(1.5, 2.0, 1.7, 1.0, 4.0, critical_p(1.5, 2.0, 1.7, 1.0, 4.0), 2.0, 2.0, 0.8),
        // portfolio curves at z = 1; base p = 0.5 of the plotted set
        "fig2a" => scalar(0.1, 1.0, 1.0, 1.0, 7.0, 0.5, 3.0, 2.0, 1.0),
        "fig2b" => scalar(1.0, 1.0, 1.0, 1.0, 7.0, 0.5, 3.0, 2.0, 1.0),
        // consumption curves at z = 1; fig3a sits below p1, fig3b above
        "fig3a" => scalar(1.0, 1.0, 6.5, 1.0, 7.0, -3.0, 3.0, 2.0, 1.0),
        "fig3b" => scalar(1.0, 1.0, 2.0, 1.0, 7.0, 0.0, 3.0, 2.0, 1.0),
        // mu_Z sweep {1.5, 2, 3}; base mu_Z = 2
        "fig4" => scalar(1.0, 1.0, 2.0, 1.0, 8.0, 0.5, 2.0, 2.0, 1.0),
        // beta sweep {1, 2, 4}; base beta = 2
        "fig5" => scalar(0.5, 1.0, 2.0, 1.0, 5.0, 0.4, 2.0, 2.0, 1.0),
        "fig6" => scalar(0.5, 1.0, 0.0, 0.0, 1.0, 0.5, 1.0, 2.0, 1.0),
        // p sweep of theta* at z = 1.2; base p = 0
        "fig7" | "fig7a" => scalar(1.0, 1.0, 3.0, 1.0, 5.0, 0.0, 2.0, 2.2, 1.2),
        // p sweep of c* at z = 0.8
        "fig7b" => scalar(1.0, 1.0, 2.0, 1.0, 5.0, 0.0, 4.0, 1.8, 0.8),
        // CRA sweeps: mu_Z over [0.5, 4.5] at sigma_Z = 0.25, sigma_Z over [0, 2] at mu_Z = 3
        "fig8" | "fig8a" | "fig8b" => scalar(1.0, 1.0, 3.0, 0.25, 5.0, -1.0, 1.0, 2.0, 1.0),
        // beta = 1 and base p = -1 are not fixed by the figure
        "fig9" => scalar(1.0, 1.0, 2.0, 0.5, 3.0, -1.0, 1.0, 6.0, 1.0),
        // mu_Z in {0.3, 0.4, 0.8}; base 0.3
        "fig10" => scalar(1.0, 1.0, 0.3, 0.0, 5.0, -1.0, 1.0, 21.0, 1.0),
        _ => return Err(Error::UnknownPreset(id.to_string())),
    })
}
