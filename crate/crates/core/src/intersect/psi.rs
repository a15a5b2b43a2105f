use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::linalg::{q, q_from_str, q_to_string, Q};

type Key = (u32, Vec<u32>);

fn memo() -> &'static RwLock<HashMap<Key, Q>> {
    static M: OnceLock<RwLock<HashMap<Key, Q>>> = OnceLock::new();
    M.get_or_init(Default::default)
}

fn kappa_memo() -> &'static RwLock<HashMap<(u32, Vec<u32>, Vec<u32>), Q>> {
    static M: OnceLock<RwLock<HashMap<(u32, Vec<u32>, Vec<u32>), Q>>> = OnceLock::new();
    M.get_or_init(Default::default)
}

/// `(2m - 1)!!` with `(-1)!! = 1`.
pub(crate) fn double_factorial_odd(m: i64) -> BigInt {
    let mut r = BigInt::one();
    let mut k = 2 * m - 1;
    while k > 1 {
        r *= k;
        k -= 2;
    }
    r
}

/// `⟨τ_{a_1} ⋯ τ_{a_n}⟩_g = ∫ ψ_1^{a_1} ⋯ ψ_n^{a_n}` over the moduli of
/// stable genus-`g` curves with `n` markings; zero off the top degree or in
/// unstable ranges.
pub fn psi_correlator(g: u32, a: &[u32]) -> Q {
    let mut key: Vec<u32> = a.to_vec();
    key.sort_unstable_by(|x, y| y.cmp(x));
    let n = key.len() as i64;
    if 2 * g as i64 - 2 + n <= 0 {
        return Q::zero();
    }
    if key.iter().map(|&x| x as i64).sum::<i64>() != 3 * g as i64 - 3 + n {
        return Q::zero();
    }
    if let Some(v) = memo().read().unwrap().get(&(g, key.clone())) {
        return v.clone();
    }
    let v = correlator_uncached(g, &key);
    memo().write().unwrap().insert((g, key), v.clone());
    v
}

/// `key` is sorted descending, stable and of top degree.
fn correlator_uncached(g: u32, key: &[u32]) -> Q {
    let n = key.len();
    if g == 0 && n == 3 {
        return Q::one();
    }
    if g == 1 && n == 1 {
        return q(1, 24);
    }
    if key[n - 1] == 0 {
        // string equation
        let rest = &key[..n - 1];
        let mut s = Q::zero();
        for j in 0..rest.len() {
            if rest[j] > 0 {
                let mut b = rest.to_vec();
                b[j] -= 1;
                s += psi_correlator(g, &b);
            }
        }
        return s;
    }
    if let Some(j) = key.iter().position(|&x| x == 1) {
        // dilaton equation
        let mut b = key.to_vec();
        b.remove(j);
        return Q::from_integer(BigInt::from(2 * g as i64 - 2 + n as i64 - 1)) * psi_correlator(g, &b);
    }
    dvv(g, key[0], &key[1..], psi_correlator)
}

/// One step of the Virasoro (DVV) recursion removing `τ_k`.
pub(crate) fn dvv(g: u32, k: u32, s: &[u32], f: fn(u32, &[u32]) -> Q) -> Q {
    let k64 = k as i64;
    let mut total = Q::zero();
    for j in 0..s.len() {
        let d = s[j] as i64;
        let coef = Q::new(double_factorial_odd(k64 + d), double_factorial_odd(d));
        let mut b = s.to_vec();
        b[j] = (k64 + d - 1) as u32;
        total += coef * f(g, &b);
    }
    if k >= 2 {
        let half = q(1, 2);
        for r in 0..=(k - 2) {
            let sdeg = k - 2 - r;
            let coef = Q::from_integer(double_factorial_odd(r as i64 + 1) * double_factorial_odd(sdeg as i64 + 1)) * &half;
            let mut acc = Q::zero();
            if g >= 1 {
                let mut b = vec![r, sdeg];
                b.extend_from_slice(s);
                acc += f(g - 1, &b);
            }
            for mask in 0..(1usize << s.len()) {
                let mut left = vec![r];
                let mut right = vec![sdeg];
                for (i, &x) in s.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        left.push(x);
                    } else {
                        right.push(x);
                    }
                }
                for g1 in 0..=g {
                    let l = f(g1, &left);
                    if l.is_zero() {
                        continue;
                    }
                    acc += l * f(g - g1, &right);
                }
            }
            total += coef * acc;
        }
    }
    total / Q::from_integer(double_factorial_odd(k64 + 1))
}

/// `∫ ∏ ψ_i^{psi_i} ∏ κ_{b}` over the moduli of stable curves of genus `g`
/// with `psi.len()` markings, through `κ_b = π_*(ψ_{n+1}^{b+1})` and
/// `π^*κ_b = κ_b - ψ_{n+1}^b`.
pub fn integrate_vertex(g: u32, psi: &[u32], kappa: &[u32]) -> Q {
    let n = psi.len() as i64;
    if 2 * g as i64 - 2 + n <= 0 {
        return Q::zero();
    }
    let deg: i64 = psi.iter().chain(kappa).map(|&x| x as i64).sum();
    if deg != 3 * g as i64 - 3 + n {
        return Q::zero();
    }
    if kappa.is_empty() {
        return psi_correlator(g, psi);
    }
    let mut p = psi.to_vec();
    p.sort_unstable();
    let mut k = kappa.to_vec();
    k.sort_unstable();
    let key = (g, p, k);
    if let Some(v) = kappa_memo().read().unwrap().get(&key) {
        return v.clone();
    }
    let (_, p, k) = &key;
    let (last, rest) = k.split_last().unwrap();
    let mut total = Q::zero();
    for mask in 0..(1usize << rest.len()) {
        let mut extra = last + 1;
        let mut keep = vec![];
        for (j, &b) in rest.iter().enumerate() {
            if mask >> j & 1 == 1 {
                extra += b;
            } else {
                keep.push(b);
            }
        }
        let mut pp = p.clone();
        pp.push(extra);
        let v = integrate_vertex(g, &pp, &keep);
        if mask.count_ones() % 2 == 1 {
            total -= v;
        } else {
            total += v;
        }
    }
    kappa_memo().write().unwrap().insert(key, total.clone());
    total
}

/// Memoized correlators, one `g;a1,a2,...;num/den` line each, sorted.
pub fn export_correlators() -> String {
    let m = memo().read().unwrap();
    let mut lines: Vec<String> = m
        .iter()
        .map(|((g, a), v)| {
            let a: Vec<String> = a.iter().map(u32::to_string).collect();
            format!("{g};{};{}", a.join(","), q_to_string(v))
        })
        .collect();
    lines.sort();
    lines.join("\n")
}

/// Parses a correlator cache; lines that disagree with a recomputation are
/// reported as errors so a corrupt file cannot poison results.
pub fn import_correlators(text: &str) -> Result<usize, String> {
    let mut n = 0;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let parts: Vec<&str> = line.split(';').collect();
        if parts.len() != 3 {
            return Err(format!("bad correlator line {line:?}"));
        }
        let g: u32 = parts[0].parse().map_err(|_| format!("bad genus in {line:?}"))?;
        let a: Vec<u32> = if parts[1].is_empty() {
            vec![]
        } else {
            parts[1].split(',').map(|x| x.parse().map_err(|_| format!("bad exponent in {line:?}"))).collect::<Result<_, _>>()?
        };
        let v = q_from_str(parts[2]).ok_or_else(|| format!("bad value in {line:?}"))?;
        if psi_correlator(g, &a) != v {
            return Err(format!("correlator mismatch in {line:?}"));
        }
        n += 1;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qi;
    use proptest::prelude::*;
    use std::cell::RefCell;

    fn factorial(n: u32) -> BigInt {
        (1..=n).fold(BigInt::one(), |a, b| a * b)
    }

    thread_local! {
        static ORACLE: RefCell<HashMap<Key, Q>> = RefCell::new(HashMap::new());
    }

    /// Plain recursion on the first insertion only, bases ⟨τ₀³⟩₀ and ⟨τ₁⟩₁.
    fn oracle(g: u32, a: &[u32]) -> Q {
        let n = a.len() as i64;
        if n == 0 || 2 * g as i64 - 2 + n <= 0 {
            return Q::zero();
        }
        if a.iter().map(|&x| x as i64).sum::<i64>() != 3 * g as i64 - 3 + n {
            return Q::zero();
        }
        if g == 0 && a == [0, 0, 0] {
            return Q::one();
        }
        if g == 1 && a == [1] {
            return q(1, 24);
        }
        let key = (g, a.to_vec());
        if let Some(v) = ORACLE.with(|m| m.borrow().get(&key).cloned()) {
            return v;
        }
        let v = dvv(g, a[0], &a[1..], oracle);
        ORACLE.with(|m| m.borrow_mut().insert(key, v.clone()));
        v
    }

    #[test]
    fn known_values() {
        assert_eq!(psi_correlator(1, &[1]), q(1, 24));
        assert_eq!(psi_correlator(2, &[4]), q(1, 1152));
        assert_eq!(oracle(2, &[4]), q(1, 1152));
        assert_eq!(psi_correlator(0, &[2, 0, 0, 0, 0]), qi(1));
        assert_eq!(psi_correlator(0, &[1, 1, 0, 0, 0]), qi(2));
        assert_eq!(psi_correlator(2, &[]), Q::zero());
    }

    #[test]
    fn genus_zero_closed_form() {
        // ⟨τ_{a_1}⋯τ_{a_n}⟩_0 = (n-3)! / ∏ a_i!
        fn parts(total: u32, n: usize) -> Vec<Vec<u32>> {
            if n == 0 {
                return if total == 0 { vec![vec![]] } else { vec![] };
            }
            (0..=total)
                .flat_map(|x| parts(total - x, n - 1).into_iter().map(move |mut p| {
                    p.push(x);
                    p
                }))
                .collect()
        }
        for n in 3..=10usize {
            for a in parts(n as u32 - 3, n) {
                let den = a.iter().fold(BigInt::one(), |acc, &x| acc * factorial(x));
                assert_eq!(psi_correlator(0, &a), Q::new(factorial(n as u32 - 3), den), "{a:?}");
            }
        }
    }

    #[test]
    fn top_psi_closed_form() {
        // ⟨τ_{3g-2}⟩_g = 1 / (24^g g!)
        for g in 1..=6u32 {
            let expected = Q::new(BigInt::one(), BigInt::from(24).pow(g) * factorial(g));
            assert_eq!(psi_correlator(g, &[3 * g - 2]), expected);
            assert_eq!(oracle(g, &[3 * g - 2]), expected);
        }
    }

    #[test]
    fn kappa_integrals() {
        assert_eq!(integrate_vertex(1, &[0], &[1]), q(1, 24));
        assert_eq!(integrate_vertex(0, &[0, 0, 0, 0], &[1]), qi(1));
        assert_eq!(integrate_vertex(0, &[0; 5], &[2]), qi(1));
        assert_eq!(integrate_vertex(0, &[0; 5], &[1, 1]), qi(5));
        // ∫κ₁ on the moduli of genus-two curves with no markings
        assert_eq!(integrate_vertex(2, &[], &[3]), q(1, 1152));
    }

    #[test]
    fn cache_roundtrip() {
        psi_correlator(2, &[2, 2, 1]);
        let text = export_correlators();
        assert!(text.lines().any(|l| l == "1;1;1/24"));
        assert!(import_correlators(&text).unwrap() > 0);
        assert!(import_correlators("1;1;1/23").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn agrees_with_oracle(g in 0u32..4, raw in proptest::collection::vec(0u32..8, 1..6)) {
            let n = raw.len() as i64;
            let dim = 3 * g as i64 - 3 + n;
            prop_assume!(dim >= 0 && 2 * g as i64 - 2 + n > 0);
            // spread the top degree over the markings following `raw`
            let mut a = vec![0u32; raw.len()];
            let mut left = dim as u32;
            for (i, &r) in raw.iter().enumerate() {
                let take = if i + 1 == raw.len() { left } else { r.min(left) };
                a[i] = take;
                left -= take;
            }
            prop_assert_eq!(psi_correlator(g, &a), oracle(g, &a));
            let mut rev = a.clone();
            rev.reverse();
            prop_assert_eq!(psi_correlator(g, &rev), psi_correlator(g, &a));
        }
    }
}
