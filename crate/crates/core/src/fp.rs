//! Roots of small polynomials over `F_p`.
//!
//! Polynomials are coefficient vectors, lowest degree first, reduced mod
//! `p` and trimmed of trailing zeros. Small primes are scanned; larger ones
//! go through `gcd(x^p - x, h)` and equal-degree splitting.

use crate::padic::modarith::{add_mod, inv_mod, mul_mod, neg_mod};

/// Below this the residues are simply evaluated one by one.
const SCAN_LIMIT: u64 = 1 << 10;

type Poly = Vec<u64>;

fn trim(mut f: Poly) -> Poly {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

fn eval(f: &[u64], x: u64, p: u64) -> u64 {
    f.iter().rev().fold(0, |acc, &c| add_mod(mul_mod(acc, x, p), c, p))
}

fn monic(f: Poly, p: u64) -> Poly {
    let lead = *f.last().expect("nonzero polynomial");
    let inv = inv_mod(lead, p).expect("p prime");
    f.into_iter().map(|c| mul_mod(c, inv, p)).collect()
}

fn sub(f: &[u64], g: &[u64], p: u64) -> Poly {
    let n = f.len().max(g.len());
    let at = |h: &[u64], i: usize| h.get(i).copied().unwrap_or(0);
    trim((0..n).map(|i| add_mod(at(f, i), neg_mod(at(g, i), p), p)).collect())
}

/// Quotient and remainder by a nonzero `g`.
fn divrem(f: &[u64], g: &[u64], p: u64) -> (Poly, Poly) {
    let mut r = trim(f.to_vec());
    let dg = g.len() - 1;
    let inv = inv_mod(g[dg], p).expect("p prime");
    if r.len() < g.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![0; r.len() - dg];
    while r.len() >= g.len() {
        let shift = r.len() - g.len();
        let c = mul_mod(*r.last().unwrap(), inv, p);
        q[shift] = c;
        for (i, &gi) in g.iter().enumerate() {
            r[shift + i] = add_mod(r[shift + i], neg_mod(mul_mod(c, gi, p), p), p);
        }
        r = trim(r);
    }
    (trim(q), r)
}

fn mulmod(f: &[u64], g: &[u64], m: &[u64], p: u64) -> Poly {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; f.len() + g.len() - 1];
    for (i, &a) in f.iter().enumerate() {
        for (j, &b) in g.iter().enumerate() {
            out[i + j] = add_mod(out[i + j], mul_mod(a, b, p), p);
        }
    }
    divrem(&out, m, p).1
}

fn powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Poly {
    let mut result = divrem(&[1], m, p).1;
    let mut b = divrem(base, m, p).1;
    while e > 0 {
        if e & 1 == 1 {
            result = mulmod(&result, &b, m, p);
        }
        b = mulmod(&b, &b, m, p);
        e >>= 1;
    }
    result
}

fn gcd(mut f: Poly, mut g: Poly, p: u64) -> Poly {
    while !g.is_empty() {
        let r = divrem(&f, &g, p).1;
        f = g;
        g = r;
    }
    if f.is_empty() {
        f
    } else {
        monic(f, p)
    }
}

/// Roots of a squarefree monic `g` that splits into distinct linear factors.
fn split(g: Poly, p: u64, out: &mut Vec<u64>) {
    match g.len() {
        0 | 1 => {}
        2 => out.push(neg_mod(g[0], p)),
        _ => {
            for delta in 0..p {
                let w = powmod(&[delta, 1], (p - 1) / 2, &g, p);
                let w = sub(&w, &[1], p);
                let h = gcd(g.clone(), w, p);
                if h.len() > 1 && h.len() < g.len() {
                    let rest = divrem(&g, &h, p).0;
                    split(h, p, out);
                    split(rest, p, out);
                    return;
                }
            }
            unreachable!("equal-degree splitting always finds a separating shift");
        }
    }
}

/// Distinct roots of `f` in `F_p`, ascending. `f` must be nonzero mod `p`.
pub(crate) fn roots(f: &[u64], p: u64) -> Vec<u64> {
    let f = trim(f.iter().map(|&c| c % p).collect());
    assert!(!f.is_empty(), "zero polynomial has every residue as a root");
    if p <= SCAN_LIMIT {
        return (0..p).filter(|&x| eval(&f, x, p) == 0).collect();
    }
    if f.len() == 1 {
        return Vec::new();
    }
    let f = monic(f, p);
    let xp = powmod(&[0, 1], p, &f, p);
    let g = gcd(f, sub(&xp, &[0, 1], p), p);
    let mut out = Vec::new();
    split(g, p, &mut out);
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_roots(rs: &[u64], p: u64) -> Poly {
        let mut f = vec![1];
        for &r in rs {
            let mut next = vec![0; f.len() + 1];
            for (i, &c) in f.iter().enumerate() {
                next[i + 1] = add_mod(next[i + 1], c, p);
                next[i] = add_mod(next[i], neg_mod(mul_mod(c, r, p), p), p);
            }
            f = next;
        }
        f
    }

    #[test]
    fn scan_and_algebraic_routes_agree() {
        let p = 1009;
        for a in 0..40u64 {
            for b in [0u64, 1, 2, 500, 1008] {
                for c in [1u64, 3, 7, 1000] {
                    let f = vec![c, b, a, 1];
                    let scanned: Vec<u64> = (0..p).filter(|&x| eval(&f, x, p) == 0).collect();
                    let fm = monic(f.clone(), p);
                    let xp = powmod(&[0, 1], p, &fm, p);
                    let g = gcd(fm, sub(&xp, &[0, 1], p), p);
                    let mut found = Vec::new();
                    split(g, p, &mut found);
                    found.sort_unstable();
                    assert_eq!(found, scanned, "{a} {b} {c}");
                }
            }
        }
    }

    #[test]
    fn large_prime() {
        let p = 4_294_967_291;
        assert_eq!(roots(&from_roots(&[5, 17, p - 1], p), p), vec![5, 17, p - 1]);
        assert_eq!(roots(&from_roots(&[9, 9, 2], p), p), vec![2, 9]);
        // x^2 + 1 has roots iff p = 1 mod 4; here p = 3 mod 4.
        assert!(roots(&[1, 0, 1], p).is_empty());
        assert_eq!(roots(&[3, 2], p), vec![mul_mod(p - 3, inv_mod(2, p).unwrap(), p)]);
        assert!(roots(&[7], p).is_empty());
    }
}
