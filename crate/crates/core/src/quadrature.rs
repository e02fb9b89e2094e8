//! Symmetric quadrature rules on triangles in barycentric form.

use crate::mesh::Bary;
use crate::Real;

/// Points in barycentric coordinates; weights are area-normalized (sum to 1),
/// so `∫_K g ≈ |K| Σ w_q g(x_q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<T> {
    pub points: Vec<Bary<T>>,
    pub weights: Vec<T>,
    /// Polynomials up to this total degree are integrated exactly.
    pub degree: usize,
}

impl<T: Real> QuadratureRule<T> {
    /// Centroid rule, exact for linears.
    pub fn centroid() -> Self {
        let third = T::one() / T::lit(3.0);
        Self {
            points: vec![[third; 3]],
            weights: vec![T::one()],
            degree: 1,
        }
    }

    /// Three interior points, exact for quadratics.
    pub fn degree2() -> Self {
        let a = T::lit(2.0 / 3.0);
        let b = T::lit(1.0 / 6.0);
        let w = T::one() / T::lit(3.0);
        Self {
            points: vec![[a, b, b], [b, a, b], [b, b, a]],
            weights: vec![w; 3],
            degree: 2,
        }
    }

    /// Seven-point rule exact for quintics.
    pub fn degree5() -> Self {
        let s15 = 15f64.sqrt();
        let mut points = vec![[T::lit(1.0 / 3.0); 3]];
        let mut weights = vec![T::lit(9.0 / 40.0)];
        for (b, w) in [
            ((6.0 - s15) / 21.0, (155.0 - s15) / 1200.0),
            ((6.0 + s15) / 21.0, (155.0 + s15) / 1200.0),
        ] {
            let a = T::lit(1.0 - 2.0 * b);
            let b = T::lit(b);
            points.extend([[a, b, b], [b, a, b], [b, b, a]]);
            weights.extend([T::lit(w); 3]);
        }
        Self {
            points,
            weights,
            degree: 5,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Iterates `(bary, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (&Bary<T>, T)> + '_ {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // ∫_{ref} λ1^a λ2^b λ3^c / |ref| = 2 a! b! c! / (a+b+c+2)!
    fn exact_monomial(a: u32, b: u32, c: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        2.0 * fact(a) * fact(b) * fact(c) / fact(a + b + c + 2)
    }

    fn check(rule: &QuadratureRule<f64>) {
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(rule.weights.iter().all(|&w| w > 0.0));
        for p in &rule.points {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        let d = rule.degree as u32;
        for a in 0..=d {
            for b in 0..=d - a {
                let c = d - a - b;
                let q: f64 = rule
                    .iter()
                    .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32))
                    .sum();
                let e = exact_monomial(a, b, c);
                assert!((q - e).abs() < 1e-14, "degree {d} monomial ({a},{b},{c}): {q} vs {e}");
            }
        }
    }

    #[test]
    fn rules_are_exact_to_their_degree() {
        check(&QuadratureRule::centroid());
        check(&QuadratureRule::degree2());
        check(&QuadratureRule::degree5());
    }

    #[test]
    fn degree5_misses_degree6() {
        let rule = QuadratureRule::<f64>::degree5();
        let q: f64 = rule.iter().map(|(p, w)| w * p[0].powi(6)).sum();
        assert!((q - exact_monomial(6, 0, 0)).abs() > 1e-8);
    }
}
