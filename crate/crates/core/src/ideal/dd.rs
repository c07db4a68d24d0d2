//! Double description on the homogenised cone `{(x, t) : a·x - b t >= 0,
//! t >= 0}` with primitive `i128` rays and the combinatorial adjacency
//! test. Returns `None` when a value leaves `i128` or the cone is not
//! pointed, so callers can fall back to subset search.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::RelaxationPolytope;
use crate::matrix::RatMatrix;
use crate::rational::{lcm_denominators, Rational};

#[derive(Clone)]
struct Ray {
    v: Vec<i128>,
    /// Processed constraints active at this ray.
    zero: u128,
}

fn scale_row(a: &[Rational], b: &Rational) -> Option<Vec<i128>> {
    let l = lcm_denominators(a.iter().chain(std::iter::once(b)));
    let conv = |x: &Rational| -> Option<i128> {
        let v: BigInt = x.numer() * (&l / x.denom());
        v.to_i128()
    };
    let mut out: Vec<i128> = a.iter().map(conv).collect::<Option<_>>()?;
    out.push(-conv(b)?);
    Some(out)
}

fn dot(h: &[i128], r: &[i128]) -> Option<i128> {
    h.iter().zip(r).try_fold(0i128, |acc, (a, b)| acc.checked_add(a.checked_mul(*b)?))
}

fn primitive(mut v: Vec<i128>) -> Vec<i128> {
    let g = v.iter().fold(0i128, |g, x| g.gcd(x));
    if g > 1 {
        for x in &mut v {
            *x /= g;
        }
    }
    v
}

pub(super) fn vertices(poly: &RelaxationPolytope) -> Option<Vec<Vec<Rational>>> {
    let n = poly.dim();
    let d = n + 1;
    // constraints: equalities (flag true), inequalities, then t >= 0
    let mut cons: Vec<(Vec<i128>, bool)> = Vec::new();
    for (a, b) in poly.eq_matrix() {
        cons.push((scale_row(&a, &b)?, true));
    }
    for (a, b) in poly.ge_matrix() {
        cons.push((scale_row(&a, &b)?, false));
    }
    let mut t = vec![0i128; d];
    t[n] = 1;
    cons.push((t, false));
    if cons.len() > 128 {
        return None;
    }

    // initial basis: d independent constraints in order
    let mut chosen: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for (k, (h, _)) in cons.iter().enumerate() {
        let mut trial = rows.clone();
        trial.push(h.iter().map(|&x| i64::try_from(x).ok().map(Rational::from)).collect::<Option<_>>()?);
        if RatMatrix::from_rows(trial.clone()).ok()?.rank() == trial.len() {
            rows = trial;
            chosen.push(k);
            if chosen.len() == d {
                break;
            }
        }
    }
    if chosen.len() < d {
        return None;
    }
    // rays are the columns of the inverse of the chosen block
    let m = RatMatrix::from_rows(rows).ok()?;
    let mut rays = Vec::with_capacity(d);
    for col in 0..d {
        let mut e = vec![Rational::zero(); d];
        e[col] = Rational::one();
        let r = m.solve_square(&e).ok()?;
        let l = lcm_denominators(r.iter());
        let v: Vec<i128> = r.iter().map(|x| (x.numer() * (&l / x.denom())).to_i128()).collect::<Option<_>>()?;
        let mut zero = 0u128;
        for (pos, &k) in chosen.iter().enumerate() {
            if pos != col {
                zero |= 1 << k;
            }
        }
        rays.push(Ray { v: primitive(v), zero });
    }
    let mut processed: u128 = chosen.iter().fold(0, |acc, &k| acc | (1 << k));

    for (k, (h, is_eq)) in cons.iter().enumerate() {
        if processed & (1 << k) != 0 {
            continue;
        }
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut next = Vec::new();
        for r in rays.iter() {
            let val = dot(h, &r.v)?;
            if val > 0 {
                pos.push((r, val));
            } else if val < 0 {
                neg.push((r, val));
            } else {
                let mut z = r.clone();
                z.zero |= 1 << k;
                next.push(z);
            }
        }
        for (p, pv) in &pos {
            for (q, qv) in &neg {
                let common = p.zero & q.zero;
                if (common.count_ones() as usize) + 2 < d {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .any(|r| !std::ptr::eq(r, *p) && !std::ptr::eq(r, *q) && r.zero & common == common);
                if blocked {
                    continue;
                }
                // pv * q - qv * p is zero on h
                let v: Vec<i128> = p
                    .v
                    .iter()
                    .zip(&q.v)
                    .map(|(a, b)| pv.checked_mul(*b)?.checked_sub(qv.checked_mul(*a)?))
                    .collect::<Option<_>>()?;
                next.push(Ray { v: primitive(v), zero: common | (1 << k) });
            }
        }
        if !is_eq {
            next.extend(pos.into_iter().map(|(r, _)| r.clone()));
        }
        rays = next;
        processed |= 1 << k;
    }
    // equalities inside the initial block: keep rays on the hyperplane
    for (h, _) in cons.iter().filter(|c| c.1) {
        let mut keep = Vec::new();
        for r in rays {
            if dot(h, &r.v)? == 0 {
                keep.push(r);
            }
        }
        rays = keep;
    }

    let mut out: Vec<Vec<Rational>> = rays
        .iter()
        .filter(|r| r.v[n] > 0)
        .map(|r| {
            let t = BigInt::from(r.v[n]);
            r.v[..n]
                .iter()
                .map(|&x| Rational::from(BigRational::new(BigInt::from(x), t.clone())))
                .collect()
        })
        .collect();
    out.sort();
    out.dedup();
    debug_assert!(out.iter().all(|x| poly.is_feasible(x)));
    Some(out)
}
