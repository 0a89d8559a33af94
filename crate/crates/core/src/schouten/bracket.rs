//! The degree 1−d Poisson-Schouten bracket and Maurer-Cartan residuals.

use super::algebra::{AlgebraKind, GradedPoly};
use super::SchoutenError;

/// (−1)^{|f||g|+(d−1)(|f|+|g|)+d}: {f • g} = sign · {g • f}.
pub fn bracket_symmetry_sign(d: u32, f: i32, g: i32) -> i64 {
    let e = (f as i64) * (g as i64) + (d as i64 - 1) * (f as i64 + g as i64) + d as i64;
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Σ_{(p,q)} (f←∂p)(→∂q g) + ε (g←∂p)(→∂q f) over the pairing, applied to
/// every pair of homogeneous components.
pub fn schouten_bracket(f: &GradedPoly, g: &GradedPoly) -> Result<GradedPoly, SchoutenError> {
    f.check_spec(g)?;
    let spec = f.spec.clone();
    let mut out = GradedPoly::zero(&spec);
    let gc = g.homogeneous_components();
    for (df, fh) in f.homogeneous_components() {
        for (dg, gh) in &gc {
            let eps = bracket_symmetry_sign(spec.d, df, *dg);
            for &(p, q) in &spec.pairing {
                let a = fh.right_derivative(p).try_mul(&gh.left_derivative(q))?;
                let b = gh.right_derivative(p).try_mul(&fh.left_derivative(q))?;
                out = out.try_add(&a)?;
                out = if eps > 0 {
                    out.try_add(&b)?
                } else {
                    out.try_add(&-&b)?
                };
            }
        }
    }
    Ok(out)
}

/// δ = Σ_α η^α y_α in the bialgebra algebra; zero elsewhere.
pub fn delta_element(f: &GradedPoly) -> GradedPoly {
    let spec = &f.spec;
    let mut out = GradedPoly::zero(spec);
    if spec.kind == AlgebraKind::Bialgebra {
        for a in 1..=spec.dim_v {
            out = &out + &(&GradedPoly::eta(spec, a) * &GradedPoly::y(spec, a));
        }
    }
    out
}

/// {γ • γ}, plus 2{δ, γ} in the bialgebra algebra, with monomials of total
/// polynomial degree above `max_degree` dropped.
pub fn mc_residual(
    gamma: &GradedPoly,
    max_degree: Option<u32>,
) -> Result<GradedPoly, SchoutenError> {
    let d = gamma.spec.d as i32;
    if !gamma.is_zero() {
        match gamma.degree() {
            None => return Err(SchoutenError::NotHomogeneous),
            Some(k) if k != d => {
                return Err(SchoutenError::WrongDegree {
                    expected: d,
                    got: k,
                })
            }
            _ => {}
        }
    }
    let mut r = schouten_bracket(gamma, gamma)?;
    if gamma.spec.kind == AlgebraKind::Bialgebra {
        let dg = schouten_bracket(&delta_element(gamma), gamma)?;
        r = &r + &(&dg + &dg);
    }
    Ok(match max_degree {
        Some(m) => r.truncate_degree(m),
        None => r,
    })
}
