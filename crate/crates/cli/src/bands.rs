//! Bands for the three reference parameter cases, enforced by
//! `run --assert`.

use std::fmt;

use crate::report::{row_slopes, Row};

#[derive(Clone, Debug, PartialEq)]
pub struct BandCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for BandCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<28} {}", self.name, self.detail)
    }
}

/// Reference value with a relative tolerance.
const REL_BAND: f64 = 0.4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    /// `(ν, ε) = (0.1, 0.1)`.
    Diffusive,
    /// `(ν, ε) = (0.1, 0.001)`.
    WeaklyDiffusive,
    /// `(ν, ε) = (1, 0)`.
    Degenerate,
}

impl Case {
    pub fn identify(nu: f64, eps: f64) -> Option<Case> {
        let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
        match () {
            _ if same(nu, 0.1) && same(eps, 0.1) => Some(Case::Diffusive),
            _ if same(nu, 0.1) && same(eps, 1e-3) => Some(Case::WeaklyDiffusive),
            _ if same(nu, 1.0) && eps == 0.0 => Some(Case::Degenerate),
            _ => None,
        }
    }
}

fn near(name: &str, rows: &[Row], n: usize, k: usize, reference: f64) -> BandCheck {
    match rows.iter().find(|r| r.n == n) {
        Some(r) => {
            let v = r.errors[k];
            BandCheck {
                name: name.to_string(),
                passed: (v - reference).abs() <= REL_BAND * reference,
                detail: format!("{v:.3e} vs {reference:.2e} +-{:.0}%", 100.0 * REL_BAND),
            }
        }
        None => BandCheck {
            name: name.to_string(),
            passed: false,
            detail: format!("level N={n} was not run"),
        },
    }
}

fn slopes_where(name: &str, slopes: &[[f64; 6]], k: usize, ok: impl Fn(f64) -> bool, rule: &str) -> BandCheck {
    let vals: Vec<f64> = slopes.iter().map(|s| s[k]).collect();
    BandCheck {
        name: name.to_string(),
        passed: !vals.is_empty() && vals.iter().all(|&v| ok(v)),
        detail: format!("{} ({rule})", fmt_list(&vals)),
    }
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Checks for a recognized case, or `None` when `(ν, ε)` has no reference.
pub fn evaluate(rows: &[Row]) -> Option<Vec<BandCheck>> {
    let first = rows.first()?;
    let case = Case::identify(first.nu, first.eps)?;
    let slopes = row_slopes(rows);
    let checks = match case {
        Case::Diffusive => {
            let mut c = vec![near("Er1 at N=32", rows, 32, 0, 2.07e-2), near("Er5 at N=32", rows, 32, 4, 1.12e-2)];
            for k in [0, 1, 4] {
                c.push(slopes_where(&format!("Er{} slopes", k + 1), &slopes, k, |v| (1.0..=1.6).contains(&v), "in [1.0, 1.6]"));
            }
            c
        }
        Case::WeaklyDiffusive => {
            let mut c = vec![near("Er1 at N=32", rows, 32, 0, 1.75e-2)];
            let er6: Vec<f64> = slopes.iter().map(|s| s[5]).collect();
            c.push(BandCheck {
                name: "Er6 slopes increasing".to_string(),
                passed: er6.len() >= 2 && er6.windows(2).all(|w| w[1] > w[0]),
                detail: fmt_list(&er6),
            });
            for k in 0..5 {
                c.push(slopes_where(&format!("Er{} slopes", k + 1), &slopes, k, |v| v >= 1.0, ">= 1.0"));
            }
            c
        }
        Case::Degenerate => vec![
            slopes_where("Er5 slopes", &slopes, 4, |v| v >= 1.0, ">= 1.0"),
            slopes_where("Er6 slopes", &slopes, 5, |v| v < 0.8, "< 0.8"),
        ],
    };
    Some(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(nu: f64, eps: f64, er: [[f64; 6]; 3]) -> Vec<Row> {
        [32, 64, 128]
            .iter()
            .zip(er)
            .map(|(&n, errors)| Row {
                n,
                h: 1.0 / n as f64,
                dt: 0.5 / n as f64,
                nu,
                eps,
                errors,
                newton_avg_iters: 2.0,
                wall_seconds: 1.0,
            })
            .collect()
    }

    #[test]
    fn reference_tables_pass_their_own_bands() {
        let t4 = rows(
            0.1,
            0.1,
            [
                [2.07e-2, 2.91e-2, 6.73e-2, 5.08e-2, 1.12e-2, 4.80e-2],
                [8.29e-3, 1.21e-2, 2.06e-2, 1.86e-2, 4.33e-3, 1.66e-2],
                [3.72e-3, 5.85e-3, 6.80e-3, 8.38e-3, 1.92e-3, 6.56e-3],
            ],
        );
        let t5 = rows(
            0.1,
            1e-3,
            [
                [1.75e-2, 2.71e-2, 9.77e-2, 6.56e-2, 2.06e-2, 2.76e-1],
                [6.74e-3, 1.12e-2, 3.17e-2, 2.22e-2, 7.36e-3, 1.16e-1],
                [2.91e-3, 5.49e-3, 1.02e-2, 9.01e-3, 2.93e-3, 4.40e-2],
            ],
        );
        let t6 = rows(
            1.0,
            0.0,
            [
                [1.36e-2, 2.30e-2, 2.03e-1, 9.39e-2, 2.13e-2, 6.71e-1],
                [4.26e-3, 9.68e-3, 6.98e-2, 3.00e-2, 7.64e-3, 5.89e-1],
                [1.40e-3, 4.84e-3, 2.16e-2, 1.19e-2, 2.81e-3, 4.51e-1],
            ],
        );
        for t in [t4, t5, t6] {
            let checks = evaluate(&t).unwrap();
            assert!(checks.iter().all(|c| c.passed), "{checks:#?}");
        }
    }

    #[test]
    fn out_of_band_values_fail() {
        let mut t = rows(1.0, 0.0, [[1.0; 6], [0.5; 6], [0.25; 6]]);
        assert!(!evaluate(&t).unwrap()[1].passed);
        t.iter_mut().for_each(|r| r.nu = 0.3);
        assert!(evaluate(&t).is_none());
    }
}
