//! Brute-force spectral oracle: characteristic polynomial by
//! Faddeev-LeVerrier, real roots by bisection between the roots of the
//! derivative. Only valid for real-rooted polynomials (symmetric matrices).

#![allow(dead_code)]

use fixtrack::builtin::{example, EXAMPLE_IDS};
use fixtrack::topology::{directed_weights, grounded_matrix, laplacian, Topology};
use nalgebra::DMatrix;

/// Coefficients of `det(x I - A)`, highest degree first (leading 1).
pub fn char_poly(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![1.0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut c = 1.0;
    for k in 1..=n {
        m = a * &m + DMatrix::identity(n, n) * c;
        let am = a * &m;
        c = -am.trace() / k as f64;
        coeffs.push(c);
    }
    coeffs
}

pub fn eval(p: &[f64], x: f64) -> f64 {
    p.iter().fold(0.0, |acc, c| acc * x + c)
}

pub fn derivative(p: &[f64]) -> Vec<f64> {
    let deg = p.len() - 1;
    p[..deg]
        .iter()
        .enumerate()
        .map(|(i, c)| c * (deg - i) as f64)
        .collect()
}

fn bisect(p: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = eval(p, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = eval(p, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Distinct real roots, ascending.
fn distinct_roots(p: &[f64]) -> Vec<f64> {
    let deg = p.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        return vec![-p[1] / p[0]];
    }
    let bound = 1.0 + p[1..].iter().map(|c| (c / p[0]).abs()).fold(0.0, f64::max);
    let scale = p.iter().map(|c| c.abs()).sum::<f64>();
    let crit = distinct_roots(&derivative(p));
    let mut knots = vec![-bound];
    knots.extend(crit.iter().copied());
    knots.push(bound);
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (eval(p, a), eval(p, b));
        if fa.abs() <= 1e-12 * scale {
            roots.push(a);
        } else if (fa < 0.0) != (fb < 0.0) && fb.abs() > 1e-12 * scale {
            roots.push(bisect(p, a, b));
        }
    }
    if let Some(&last) = crit.last() {
        if eval(p, last).abs() <= 1e-12 * scale && roots.last() != Some(&last) {
            roots.push(last);
        }
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
    roots
}

/// All real roots with multiplicity, ascending.
pub fn real_roots(p: &[f64]) -> Vec<f64> {
    let scale = p.iter().map(|c| c.abs()).sum::<f64>();
    let mut out = Vec::new();
    for r in distinct_roots(p) {
        let mut q = p.to_vec();
        let mut mult = 0;
        while q.len() > 1 && eval(&q, r).abs() <= 1e-9 * scale {
            mult += 1;
            q = derivative(&q);
        }
        out.extend(std::iter::repeat_n(r, mult.max(1)));
    }
    out
}

/// Every symmetric matrix whose spectrum the shipped scenarios depend on.
pub fn shipped_matrices() -> Vec<(String, DMatrix<f64>)> {
    let mut out = Vec::new();
    for id in EXAMPLE_IDS {
        let sc = example(id).unwrap();
        let Some(topo) = &sc.topology else { continue };
        if !topo.is_directed() {
            out.push((format!("example {id} L"), laplacian(topo)));
        }
        if topo.has_leader_links() {
            if topo.is_directed() {
                out.push((format!("example {id} Q"), directed_weights(topo).unwrap().q));
            } else {
                out.push((format!("example {id} L+B"), grounded_matrix(topo).unwrap()));
            }
        }
    }
    let chain = Topology::directed_chain(2).unwrap();
    out.push(("chain of 2 Q".into(), directed_weights(&chain).unwrap().q));
    let k2 = Topology::from_edges(2, &[(0, 1, 1.0)], &[0.0, 0.0], false).unwrap();
    out.push(("K2 L".into(), laplacian(&k2)));
    let k4 = Topology::from_edges(
        4,
        &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)],
        &[0.0; 4],
        false,
    )
    .unwrap();
    out.push(("K4 L".into(), laplacian(&k4)));
    let path = Topology::path(3, &[1.0, 0.0, 0.0]).unwrap();
    out.push(("path of 3 L+B".into(), grounded_matrix(&path).unwrap()));
    out
}
