//! Target-string sugar: plain 0/1 literals plus `BASE^COUNT` repetition,
//! so long compressible targets don't have to be typed out.

use decohist_core::Bits;

/// Parses a target spec: a 0/1 literal (possibly empty), `0^N`, `1^N`,
/// or `(BITS)^N`.
pub fn parse_target(spec: &str) -> Result<Bits, String> {
    if spec.chars().all(|c| c == '0' || c == '1') {
        return Ok(bits_of(spec));
    }
    if let Some((base, count)) = spec.rsplit_once('^') {
        let count: usize = count.parse().map_err(|_| bad(spec))?;
        let unit = base
            .strip_prefix('(')
            .and_then(|inner| inner.strip_suffix(')'))
            .unwrap_or(base);
        if !unit.is_empty() && unit.chars().all(|c| c == '0' || c == '1') {
            let mut repeated = String::with_capacity(unit.len() * count);
            for _ in 0..count {
                repeated.push_str(unit);
            }
            return Ok(bits_of(&repeated));
        }
    }
    Err(bad(spec))
}

fn bits_of(text: &str) -> Bits {
    text.chars().map(|c| c == '1').collect()
}

fn bad(spec: &str) -> String {
    format!("bad target {spec:?}: expected a 0/1 literal, 0^N, 1^N, or (BITS)^N")
}
