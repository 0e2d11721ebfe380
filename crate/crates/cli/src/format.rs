//! Text rendering helpers.

/// Renders `x` with six significant digits, switching to scientific notation
/// outside `[1e-4, 1e6)`.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_fraction(&s).to_string()
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, power) = s.split_once('e').expect("scientific format");
        format!("{}e{power}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| sig6(x)).collect();
    format!("({})", parts.join(", "))
}

pub fn exponent(k: &[u32]) -> String {
    let parts: Vec<String> = k.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

pub fn point_set(points: &[Vec<u32>]) -> String {
    let parts: Vec<String> = points.iter().map(|k| exponent(k)).collect();
    format!("{{{}}}", parts.join(", "))
}
