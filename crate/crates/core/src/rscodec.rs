//! Systematic evaluation-based Reed–Solomon codes with Berlekamp–Welch
//! decoding.
//!
//! A message of k symbols is interpolated into the unique polynomial P with
//! P(X_i) = M_i on the first k evaluation points; the codeword is P evaluated
//! on all n points, so the first k symbols are the message itself.
//!
//! Decoding solves N(X_i) = R_i·Q(X_i) for an error locator Q (monic, degree
//! t) and a numerator N (degree ≤ t + k − 1) by Gaussian elimination, then
//! recovers P = N / Q.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{invalid, Error, Result};
use crate::gf::{Elem, Field, Poly};

pub type MessageBits = Bits;

/// Code geometry (n, k, t) plus the evaluation set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeParams {
    field: Arc<Field>,
    n: usize,
    k: usize,
    t: usize,
    eval_points: Vec<Elem>,
}

impl CodeParams {
    /// Code with evaluation points X_i = α^i.
    pub fn new(field: Arc<Field>, n: usize, k: usize) -> Result<Self> {
        let points = (0..n).map(|i| field.alpha_pow(i)).collect();
        Self::with_points(field, n, k, points)
    }

    pub fn with_points(field: Arc<Field>, n: usize, k: usize, eval_points: Vec<Elem>) -> Result<Self> {
        let n_max = field.order() - 1;
        if n > n_max {
            return invalid(format!("n = {n} exceeds n_max = {n_max} for GF(2^{})", field.bits()));
        }
        if k == 0 || k >= n {
            return invalid(format!("need 0 < k < n, got k = {k}, n = {n}"));
        }
        if eval_points.len() != n {
            return invalid(format!("{} evaluation points for n = {n}", eval_points.len()));
        }
        for (i, p) in eval_points.iter().enumerate() {
            if p.value() as usize >= field.order() {
                return invalid(format!("evaluation point {p:?} outside the field"));
            }
            if eval_points[..i].contains(p) {
                return invalid(format!("duplicate evaluation point {p:?}"));
            }
        }
        Ok(Self { field, n, k, t: (n - k) / 2, eval_points })
    }

    /// GF(16), n = 15, k = 12, t = 1: 48 information bits in 60 code bits.
    pub fn gf16_15_12() -> Self {
        Self::new(Field::gf16(), 15, 12).expect("valid geometry")
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn field_arc(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Bits per symbol.
    pub fn m(&self) -> u32 {
        self.field.bits()
    }

    pub fn eval_points(&self) -> &[Elem] {
        &self.eval_points
    }

    pub fn message_bits(&self) -> usize {
        self.k * self.m() as usize
    }

    pub fn codeword_bits(&self) -> usize {
        self.n * self.m() as usize
    }

    fn symbols_of(&self, bits: &Bits) -> Result<Vec<Elem>> {
        bits.to_symbols(self.m())?
            .into_iter()
            .map(|s| self.field.element(s as u32))
            .collect()
    }

    fn bits_of(&self, symbols: &[Elem]) -> Bits {
        let raw: Vec<u16> = symbols.iter().map(|e| e.value()).collect();
        Bits::from_symbols(&raw, self.m())
    }
}

/// Named code configurations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Profile {
    /// GF(16) (15, 12), t = 1.
    #[default]
    Gf16_15_12,
    /// GF(256) with k chosen from the payload length and `parity` extra
    /// symbols (two by default, which gives t = 1).
    Gf256Dynamic { parity: usize },
    /// Explicit geometry over GF(16) (m = 4) or GF(256) (m = 8).
    Fixed { m: u32, n: usize, k: usize },
}

impl Profile {
    /// Resolves the profile for a payload of `payload_bits` information bits.
    pub fn params(&self, payload_bits: usize) -> Result<CodeParams> {
        let p = match *self {
            Profile::Gf16_15_12 => CodeParams::gf16_15_12(),
            Profile::Gf256Dynamic { parity } => {
                if payload_bits == 0 || !payload_bits.is_multiple_of(8) {
                    return invalid(format!("gf256 payload must be a positive multiple of 8 bits, got {payload_bits}"));
                }
                let k = payload_bits / 8;
                CodeParams::new(Field::gf256(), k + parity.max(1), k)?
            }
            Profile::Fixed { m, n, k } => {
                let field = match m {
                    4 => Field::gf16(),
                    8 => Field::gf256(),
                    _ => return invalid(format!("unsupported symbol width {m}")),
                };
                CodeParams::new(field, n, k)?
            }
        };
        if p.message_bits() != payload_bits {
            return invalid(format!(
                "profile {self} carries {} information bits, payload has {payload_bits}",
                p.message_bits()
            ));
        }
        Ok(p)
    }

    /// Information bits when the profile fixes them.
    pub fn fixed_payload_bits(&self) -> Option<usize> {
        match *self {
            Profile::Gf16_15_12 => Some(48),
            Profile::Gf256Dynamic { .. } => None,
            Profile::Fixed { m, k, .. } => Some(m as usize * k),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Profile::Gf16_15_12 => f.write_str("gf16-15-12"),
            Profile::Gf256Dynamic { parity: 2 } => f.write_str("gf256-dynamic"),
            Profile::Gf256Dynamic { parity } => write!(f, "gf256-dynamic-{parity}"),
            Profile::Fixed { m, n, k } => write!(f, "gf{}-{n}-{k}", 1u32 << m),
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "gf16-15-12" {
            return Ok(Profile::Gf16_15_12);
        }
        if s == "gf256-dynamic" {
            return Ok(Profile::Gf256Dynamic { parity: 2 });
        }
        if let Some(rest) = s.strip_prefix("gf256-dynamic-") {
            let parity = rest.parse().map_err(|_| Error::InvalidInput(format!("bad parity in '{s}'")))?;
            return Ok(Profile::Gf256Dynamic { parity });
        }
        let parts: Vec<&str> = s.split('-').collect();
        if let [field, n, k] = parts[..] {
            let m = match field {
                "gf16" => 4,
                "gf256" => 8,
                _ => return invalid(format!("unknown field in profile '{s}'")),
            };
            let n = n.parse().map_err(|_| Error::InvalidInput(format!("bad n in '{s}'")))?;
            let k = k.parse().map_err(|_| Error::InvalidInput(format!("bad k in '{s}'")))?;
            return Ok(Profile::Fixed { m, n, k });
        }
        invalid(format!("unknown code profile '{s}'"))
    }
}

impl TryFrom<String> for Profile {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Profile> for String {
    fn from(p: Profile) -> String {
        p.to_string()
    }
}

/// A codeword in both bit and symbol form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CodewordBits {
    bits: Bits,
    symbols: Vec<Elem>,
}

impl CodewordBits {
    pub fn from_bits(bits: Bits, params: &CodeParams) -> Result<Self> {
        if bits.len() != params.codeword_bits() {
            return invalid(format!(
                "codeword has {} bits, expected {}",
                bits.len(),
                params.codeword_bits()
            ));
        }
        let symbols = params.symbols_of(&bits)?;
        Ok(Self { bits, symbols })
    }

    fn from_symbols(symbols: Vec<Elem>, params: &CodeParams) -> Self {
        Self { bits: params.bits_of(&symbols), symbols }
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn symbols(&self) -> &[Elem] {
        &self.symbols
    }

    pub fn into_bits(self) -> Bits {
        self.bits
    }

    /// The first `k·m` bits.
    pub fn message(&self, params: &CodeParams) -> Bits {
        self.bits.slice(0, params.message_bits())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DecodeResult {
    pub message: MessageBits,
    pub codeword: CodewordBits,
    /// Symbol positions where the received word differed from `codeword`.
    pub errors_corrected: usize,
}

/// Systematic encoding of `k·m` message bits.
pub fn rs_encode(msg: &MessageBits, params: &CodeParams) -> Result<CodewordBits> {
    if msg.len() != params.message_bits() {
        return invalid(format!(
            "message has {} bits, expected k·m = {}",
            msg.len(),
            params.message_bits()
        ));
    }
    let f = params.field();
    let symbols = params.symbols_of(msg)?;
    let points: Vec<(Elem, Elem)> = params.eval_points[..params.k]
        .iter()
        .copied()
        .zip(symbols.iter().copied())
        .collect();
    let p = f.lagrange_interpolate(&points)?;
    let mut code = symbols;
    code.extend(params.eval_points[params.k..].iter().map(|&x| f.poly_eval(&p, x)));
    Ok(CodewordBits::from_symbols(code, params))
}

/// Berlekamp–Welch decoding of a received `n·m`-bit word.
///
/// Tries assumed error counts t, t−1, …, 0 and returns the first consistent
/// solution; a word with no solution on any rung is a [`Error::DecodeFailure`].
pub fn bw_decode(received: &Bits, params: &CodeParams) -> Result<DecodeResult> {
    let word = CodewordBits::from_bits(received.clone(), params)?;
    let f = params.field();
    for e in (0..=params.t).rev() {
        let Some(p) = solve_key_equation(params, &word.symbols, e) else {
            continue;
        };
        let code: Vec<Elem> = params.eval_points.iter().map(|&x| f.poly_eval(&p, x)).collect();
        let errors = code.iter().zip(&word.symbols).filter(|(a, b)| a != b).count();
        if errors > params.t {
            continue;
        }
        let codeword = CodewordBits::from_symbols(code, params);
        return Ok(DecodeResult {
            message: codeword.message(params),
            codeword,
            errors_corrected: errors,
        });
    }
    Err(Error::DecodeFailure(format!(
        "more than {} symbol errors in a ({}, {}) word",
        params.t, params.n, params.k
    )))
}

/// Solves for (Q, N) with Q monic of degree `e` and returns P = N / Q when
/// the division is exact and deg P < k.
fn solve_key_equation(params: &CodeParams, r: &[Elem], e: usize) -> Option<Poly> {
    let f = params.field();
    let k = params.k;
    // unknowns: q_0..q_{e-1}, then n_0..n_{e+k-1}; last column is the RHS.
    let unknowns = 2 * e + k;
    let cols = unknowns + 1;
    let mut rows: Vec<Vec<Elem>> = Vec::with_capacity(params.n);
    for (&x, &ri) in params.eval_points.iter().zip(r) {
        let mut row = vec![Elem::ZERO; cols];
        let mut xp = Elem::ONE;
        for j in 0..e + k {
            if j < e {
                row[j] = f.mul(ri, xp);
            }
            row[e + j] = xp;
            xp = f.mul(xp, x);
        }
        // xp == x^(e+k) here; recompute x^e for the RHS.
        row[unknowns] = f.mul(ri, f.pow(x, e as u64));
        rows.push(row);
    }
    let solution = gaussian_solve(f, &mut rows, unknowns)?;
    let mut q: Vec<Elem> = solution[..e].to_vec();
    q.push(Elem::ONE);
    let q = Poly::new(q);
    let n = Poly::new(solution[e..].to_vec());
    let (p, rem) = f.poly_div(&n, &q).ok()?;
    if !rem.is_zero() {
        return None;
    }
    if p.degree().is_some_and(|d| d >= k) {
        return None;
    }
    Some(p)
}

/// Row-reduces an augmented system in place. Returns one solution (free
/// variables set to zero) or `None` when inconsistent.
fn gaussian_solve(f: &Field, rows: &mut [Vec<Elem>], unknowns: usize) -> Option<Vec<Elem>> {
    let mut pivot_cols = Vec::with_capacity(unknowns);
    let mut r = 0;
    for c in 0..unknowns {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = f.inv(rows[r][c]).ok()?;
        for v in rows[r][c..].iter_mut() {
            *v = f.mul(*v, inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c];
            for (v, &pv) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                *v = f.sub(*v, f.mul(factor, pv));
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    if rows[r..].iter().any(|row| !row[unknowns].is_zero()) {
        return None;
    }
    let mut x = vec![Elem::ZERO; unknowns];
    for (i, &c) in pivot_cols.iter().enumerate() {
        x[c] = rows[i][unknowns];
    }
    Some(x)
}

/// Loss that ignores symbol errors the code can absorb: `max(0, E − t)²`
/// where E counts differing m-bit symbols.
pub fn rs_aware_loss(predicted: &MessageBits, target: &MessageBits, params: &CodeParams) -> Result<f64> {
    if predicted.len() != target.len() {
        return invalid(format!("length mismatch: {} vs {}", predicted.len(), target.len()));
    }
    let a = predicted.to_symbols(params.m())?;
    let b = target.to_symbols(params.m())?;
    let e = a.iter().zip(&b).filter(|(x, y)| x != y).count();
    let excess = e.saturating_sub(params.t) as f64;
    Ok(excess * excess)
}

/// Fraction of equal bits.
pub fn bit_accuracy(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return invalid(format!("length mismatch: {} vs {}", a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(1.0);
    }
    let same = a.iter().zip(b).filter(|(x, y)| x == y).count();
    Ok(same as f64 / a.len() as f64)
}

/// Fraction of messages recovered exactly; `None` entries count as misses.
pub fn word_accuracy(decoded: &[Option<MessageBits>], truth: &[MessageBits]) -> Result<f64> {
    if decoded.len() != truth.len() {
        return invalid(format!("length mismatch: {} vs {}", decoded.len(), truth.len()));
    }
    if truth.is_empty() {
        return Ok(1.0);
    }
    let hits = decoded
        .iter()
        .zip(truth)
        .filter(|(d, t)| d.as_ref() == Some(*t))
        .count();
    Ok(hits as f64 / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msg48(seed: u64) -> Bits {
        let mut r = crate::rng::CounterRng::new(seed);
        Bits::new((0..48).map(|_| r.next_u64() & 1 == 1).collect())
    }

    #[test]
    fn geometry_checks() {
        assert!(CodeParams::new(Field::gf16(), 16, 12).is_err());
        assert!(CodeParams::new(Field::gf16(), 15, 15).is_err());
        assert!(CodeParams::new(Field::gf16(), 15, 0).is_err());
        let p = CodeParams::gf16_15_12();
        assert_eq!((p.n(), p.k(), p.t()), (15, 12, 1));
        let dup = vec![Elem::ONE; 15];
        assert!(CodeParams::with_points(Field::gf16(), 15, 12, dup).is_err());
    }

    #[test]
    fn zero_message_gives_zero_codeword() {
        let p = CodeParams::gf16_15_12();
        let c = rs_encode(&Bits::zeros(48), &p).unwrap();
        assert_eq!(c.bits(), &Bits::zeros(60));
    }

    #[test]
    fn encode_is_systematic_and_sized() {
        let p = CodeParams::gf16_15_12();
        let m = msg48(3);
        let c = rs_encode(&m, &p).unwrap();
        assert_eq!(c.bits().len(), 60);
        assert_eq!(c.bits().slice(0, 48), m);
    }

    #[test]
    fn wrong_lengths_are_rejected() {
        let p = CodeParams::gf16_15_12();
        assert!(rs_encode(&Bits::zeros(47), &p).is_err());
        assert!(bw_decode(&Bits::zeros(59), &p).is_err());
    }

    #[test]
    fn clean_word_decodes_without_corrections() {
        let p = CodeParams::gf16_15_12();
        let m = msg48(9);
        let c = rs_encode(&m, &p).unwrap();
        let d = bw_decode(c.bits(), &p).unwrap();
        assert_eq!(d.message, m);
        assert_eq!(d.errors_corrected, 0);
    }

    #[test]
    fn gf256_dynamic_profile_has_t_one() {
        // 8-bit symbols with two redundant symbols.
        let p = Profile::Gf256Dynamic { parity: 2 }.params(48).unwrap();
        assert_eq!((p.n(), p.k(), p.t(), p.m()), (8, 6, 1, 8));
    }

    #[test]
    fn gf256_double_error_correction() {
        let p = CodeParams::new(Field::gf256(), 20, 16).unwrap();
        assert_eq!(p.t(), 2);
        let mut r = crate::rng::CounterRng::new(5);
        let m = Bits::new((0..128).map(|_| r.next_u64() & 1 == 1).collect());
        let c = rs_encode(&m, &p).unwrap();
        let mut recv = c.bits().clone();
        recv.flip(3); // symbol 0
        recv.flip(8 * 17 + 2); // symbol 17
        let d = bw_decode(&recv, &p).unwrap();
        assert_eq!(d.message, m);
        assert_eq!(d.errors_corrected, 2);
        // three errors exceed t
        recv.flip(8 * 9);
        match bw_decode(&recv, &p) {
            Err(Error::DecodeFailure(_)) => {}
            Ok(d) => assert_ne!(d.message, m),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn rs_aware_loss_examples() {
        let p = CodeParams::gf16_15_12();
        let m = msg48(1);
        assert_eq!(rs_aware_loss(&m, &m, &p).unwrap(), 0.0);
        let mut one = m.clone();
        one.flip(0);
        one.flip(1); // still one symbol
        assert_eq!(rs_aware_loss(&one, &m, &p).unwrap(), 0.0);
        let mut three = m.clone();
        for s in [0, 4, 8] {
            three.flip(s * 4);
        }
        assert_eq!(rs_aware_loss(&three, &m, &p).unwrap(), 4.0);
        assert!(rs_aware_loss(&Bits::zeros(44), &m, &p).is_err());
    }

    #[test]
    fn accuracy_examples() {
        let a = msg48(2);
        assert_eq!(bit_accuracy(a.as_slice(), a.as_slice()).unwrap(), 1.0);
        let inv: Vec<bool> = a.as_slice().iter().map(|b| !b).collect();
        assert_eq!(bit_accuracy(a.as_slice(), &inv).unwrap(), 0.0);
        let mut b = a.clone();
        b.flip(7);
        assert!((bit_accuracy(a.as_slice(), b.as_slice()).unwrap() - 47.0 / 48.0).abs() < 1e-12);
        assert!(bit_accuracy(a.as_slice(), &inv[1..]).is_err());
        let w = word_accuracy(&[Some(a.clone()), None, Some(b)], &[a.clone(), a.clone(), a]).unwrap();
        assert!((w - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn profile_names_round_trip() {
        for name in ["gf16-15-12", "gf256-dynamic", "gf256-20-16", "gf16-15-9"] {
            let p: Profile = name.parse().unwrap();
            assert_eq!(p.to_string(), name);
        }
        assert!("gf32-3-1".parse::<Profile>().is_err());
        assert!(Profile::Gf16_15_12.params(40).is_err());
    }
}
