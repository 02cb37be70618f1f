//! Multivariate GCD over Q by content/primitive-part recursion with a
//! primitive pseudo-remainder sequence in the variable of highest degree.

use super::poly::Poly;

/// Greatest common divisor, normalised to a monic leading term.
/// `gcd(f, 0)` is the monic form of `f`; `gcd(0, 0)` is `0`.
pub fn poly_gcd(lhs: &Poly, rhs: &Poly) -> Poly {
    assert!(lhs.symbols() == rhs.symbols(), "symbol tables differ");
    gcd_rec(lhs, rhs).monic()
}

/// Least common multiple, monic.
pub fn poly_lcm(lhs: &Poly, rhs: &Poly) -> Poly {
    if lhs.is_zero() || rhs.is_zero() {
        return Poly::zero(lhs.symbols());
    }
    let g = poly_gcd(lhs, rhs);
    let prod = lhs * rhs;
    prod.div_exact(&g).expect("gcd divides the product").monic()
}

fn gcd_rec(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one(a.symbols());
    }
    if a == b {
        return a.monic();
    }
    if a.num_terms() == 1 || b.num_terms() == 1 {
        return monomial_gcd(a, b);
    }
    // Cheap exit when one divides the other.
    if a.num_terms() >= b.num_terms() {
        if a.div_exact(b).is_some() {
            return b.monic();
        }
    } else if b.div_exact(a).is_some() {
        return a.monic();
    }

    let v = main_variable(a, b);
    let (da, db) = (a.degree_in(v), b.degree_in(v));
    if da == 0 {
        return gcd_rec(a, &content_in(b, v));
    }
    if db == 0 {
        return gcd_rec(&content_in(a, v), b);
    }

    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let c = gcd_rec(&ca, &cb);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let g = primitive_prs(pa, pb, v);
    (&c * &g).monic()
}

/// When one side is a single term the gcd is the variable-wise minimum
/// exponent over all terms of both.
fn monomial_gcd(a: &Poly, b: &Poly) -> Poly {
    let n = a.symbols().len();
    let mut exps: Option<Vec<u32>> = None;
    for (m, _) in a.terms().chain(b.terms()) {
        exps = Some(match exps {
            None => m.0.clone(),
            Some(e) => e.iter().zip(&m.0).map(|(x, y)| *x.min(y)).collect(),
        });
    }
    let exps = exps.unwrap_or_else(|| vec![0; n]);
    Poly::monomial(a.symbols(), super::Monomial(exps), num_traits::One::one())
}

fn main_variable(a: &Poly, b: &Poly) -> usize {
    let n = a.symbols().len();
    (0..n)
        .max_by_key(|&i| (a.degree_in(i).max(b.degree_in(i)), std::cmp::Reverse(i)))
        .expect("non-empty table")
}

/// GCD of the coefficients of `p` viewed as a polynomial in symbol `v`.
fn content_in(p: &Poly, v: usize) -> Poly {
    let mut g = Poly::zero(p.symbols());
    for c in p.to_univariate(v) {
        if c.is_zero() {
            continue;
        }
        g = gcd_rec(&g, &c);
        if g.is_one() {
            break;
        }
    }
    g.monic()
}

fn primitive_part(p: &Poly, v: usize) -> Poly {
    if p.is_zero() {
        return p.clone();
    }
    let c = content_in(p, v);
    p.div_exact(&c).expect("content divides").primitive_integer()
}

/// Pseudo-remainder of `f` by `g` in symbol `v`.
fn prem(f: &Poly, g: &Poly, v: usize) -> Poly {
    let syms = f.symbols().clone();
    let dg = g.degree_in(v);
    let g_coeffs = g.to_univariate(v);
    let lc_g = g_coeffs[dg as usize].clone();
    let mut r = f.clone();
    while !r.is_zero() && r.degree_in(v) >= dg {
        let dr = r.degree_in(v);
        let lc_r = r.to_univariate(v).pop().expect("non-empty");
        let shift = Poly::monomial(
            &syms,
            super::Monomial::var(syms.len(), v, dr - dg),
            num_traits::One::one(),
        );
        r = &(&lc_g * &r) - &(&(&lc_r * &shift) * g);
    }
    r
}

fn primitive_prs(mut f: Poly, mut g: Poly, v: usize) -> Poly {
    if f.degree_in(v) < g.degree_in(v) {
        std::mem::swap(&mut f, &mut g);
    }
    loop {
        let r = prem(&f, &g, v);
        if r.is_zero() {
            return primitive_part(&g, v);
        }
        if r.degree_in(v) == 0 {
            return Poly::one(f.symbols());
        }
        f = g;
        g = primitive_part(&r, v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{parse_expr, Symbols};

    fn p(s: &str) -> Poly {
        parse_expr(s, &Symbols::new(["a", "b", "c", "d", "p", "s", "x"])).unwrap()
    }

    #[test]
    fn gcd_of_difference_of_squares() {
        assert_eq!(poly_gcd(&p("a^2 - b^2"), &p("a + b")), p("a + b"));
    }

    #[test]
    fn coprime_symbols() {
        assert_eq!(poly_gcd(&p("p"), &p("s")), p("1"));
    }

    #[test]
    fn gcd_with_zero_is_monic() {
        assert_eq!(poly_gcd(&p("2*a + 4*b"), &p("0")), p("a + 2*b"));
    }

    #[test]
    fn common_parameter_factor() {
        // coefficients of the cleared simplified Lotka-Volterra relation
        // before dividing through by 2
        let coeffs = [
            "2*a*c*d", "2*a*d^2", "-2*a*d - 2*c*d", "-d^2", "2*d", "d^2*p^2",
        ];
        let g = coeffs
            .iter()
            .fold(Poly::zero(&p("a").symbols().clone()), |acc, c| poly_gcd(&acc, &p(c)));
        assert_eq!(g, p("d"));
        let reduced: Vec<Poly> = coeffs
            .iter()
            .map(|c| p(c).div_exact(&g).unwrap())
            .collect();
        assert_eq!(reduced[5], p("d*p^2"));
    }

    #[test]
    fn multivariate_nontrivial() {
        let g = p("a*b - c + x^2");
        let f1 = &g * &p("a + d^2 - 1");
        let f2 = &g * &p("b*c + x");
        assert_eq!(poly_gcd(&f1, &f2), g.monic());
    }

    #[test]
    fn lcm_of_monomials() {
        assert_eq!(poly_lcm(&p("2*a*b"), &p("b^2*c")), p("a*b^2*c"));
    }
}
