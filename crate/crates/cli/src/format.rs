//! Table rendering with six significant digits.

use qhellinger::matrix::HermitianMatrix;

/// `%g`-style rendering with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-5..6).contains(&exponent) {
        let decimals = (5 - exponent).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, exp) = s.split_once('e').unwrap_or((&s, "0"));
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{exp}")
    }
}

fn entry(m: &HermitianMatrix, i: usize, j: usize) -> String {
    let z = m.get(i, j);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    if z.im.abs() <= 1e-14 * scale {
        sig6(z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", sig6(z.re), sig6(-z.im))
    } else {
        format!("{}+{}i", sig6(z.re), sig6(z.im))
    }
}

/// Bracketed rows, e.g. `[[2.99035, 0.634419], [0.634419, 1.72151]]`.
pub fn matrix(m: &HermitianMatrix) -> String {
    let rows: Vec<String> = (0..m.dim())
        .map(|i| {
            let cells: Vec<String> = (0..m.dim()).map(|j| entry(m, i, j)).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

pub fn grid(values: &[[f64; 2]; 2]) -> String {
    format!(
        "[[{}, {}], [{}, {}]]",
        sig6(values[0][0]),
        sig6(values[0][1]),
        sig6(values[1][0]),
        sig6(values[1][1])
    )
}
