//! The catalogue of named closed forms accepted in scenario files.

use memkern::{GridFunction64, TimeGrid64};

/// Samples a named closed form with the given coefficients onto a grid.
///
/// Catalogue:
/// * `const [a]`        — `a`
/// * `linear [a, b]`    — `a + b·t`
/// * `poly [c0, c1, …]` — `Σ c_k·t^k`
/// * `exp [a, b]`       — `a·e^{b·t}`
/// * `sin [a, w]`       — `a·sin(w·t)`
/// * `zero []`          — `0`
pub fn sample(name: &str, coeffs: &[f64], grid: TimeGrid64) -> Result<GridFunction64, String> {
    let need = |n: usize| -> Result<(), String> {
        if coeffs.len() == n {
            Ok(())
        } else {
            Err(format!(
                "form '{name}' takes {n} coefficient(s), got {}",
                coeffs.len()
            ))
        }
    };
    match name {
        "zero" => {
            need(0)?;
            Ok(GridFunction64::zeros(grid))
        }
        "const" => {
            need(1)?;
            let a = coeffs[0];
            Ok(GridFunction64::constant(grid, a))
        }
        "linear" => {
            need(2)?;
            let (a, b) = (coeffs[0], coeffs[1]);
            Ok(GridFunction64::sample(grid, |t| a + b * t))
        }
        "poly" => {
            if coeffs.is_empty() {
                return Err("form 'poly' needs at least one coefficient".into());
            }
            let c = coeffs.to_vec();
            Ok(GridFunction64::sample(grid, move |t| {
                c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck)
            }))
        }
        "exp" => {
            need(2)?;
            let (a, b) = (coeffs[0], coeffs[1]);
            Ok(GridFunction64::sample(grid, move |t| a * (b * t).exp()))
        }
        "sin" => {
            need(2)?;
            let (a, w) = (coeffs[0], coeffs[1]);
            Ok(GridFunction64::sample(grid, move |t| a * (w * t).sin()))
        }
        other => Err(format!(
            "unknown form '{other}'; expected one of zero, const, linear, poly, exp, sin"
        )),
    }
}
