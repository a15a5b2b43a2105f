use super::*;
use crate::linalg::qi;

fn table(g: u32, n: usize, variant: Variant, dir: Direction) -> WeightTable {
    let d = 3 * g as usize + n - 3;
    let art = Artifacts::new();
    e2_table(&art, &TableRequest::new(g, n, variant, dir, (0..=2 * d).collect())).unwrap()
}

/// Brute-force `|M_{0,n}(F_p)|`: fix three points at 0, 1, ∞ and count
/// tuples of distinct remaining points.
fn count_m0n(n: usize, p: u64) -> u64 {
    fn rec(k: usize, used: &mut Vec<u64>, p: u64) -> u64 {
        if k == 0 {
            return 1;
        }
        let mut total = 0;
        for x in 2..p {
            if !used.contains(&x) {
                used.push(x);
                total += rec(k - 1, used, p);
                used.pop();
            }
        }
        total
    }
    rec(n - 3, &mut vec![], p)
}

/// Coefficients (constant first) of the point-count polynomial, by
/// Lagrange interpolation at small primes.
fn point_count_polynomial(n: usize) -> Vec<Q> {
    let primes = [5u64, 7, 11, 13, 17, 19, 23];
    let deg = n - 3;
    let xs: Vec<Q> = primes[..=deg].iter().map(|&p| qi(p as i64)).collect();
    let ys: Vec<Q> = primes[..=deg].iter().map(|&p| qi(count_m0n(n, p) as i64)).collect();
    let mut coef = vec![qi(0); deg + 1];
    for i in 0..=deg {
        // basis polynomial prod_{j != i} (x - x_j) / (x_i - x_j)
        let mut poly = vec![qi(1)];
        let mut denom = qi(1);
        for j in 0..=deg {
            if j == i {
                continue;
            }
            let mut next = vec![qi(0); poly.len() + 1];
            for (k, c) in poly.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * &xs[j];
            }
            poly = next;
            denom *= &xs[i] - &xs[j];
        }
        for (k, c) in poly.iter().enumerate() {
            coef[k] += c * &ys[i] / &denom;
        }
    }
    coef
}

#[test]
fn genus_zero_matches_point_counts() {
    for n in 4..=5 {
        let t = table(0, n, Variant::Open, Direction::Push);
        let d = n - 3;
        let poly = point_count_polynomial(n);
        let full = vec![1; n];
        for q in 0..=2 * d {
            for r in 0..=2 * d {
                let want = if q == 2 * r && r <= d {
                    // coefficient of q^{d-r} is (-1)^r dim H^r
                    let c = poly[d - r].clone();
                    let c = if r % 2 == 1 { -c } else { c };
                    c.to_integer().try_into().unwrap()
                } else {
                    0u64
                };
                assert_eq!(t.get(q, r, &full), want, "M_0,{n} gr_{q} H^{r}");
            }
        }
        assert!(t.euler_invariant());
    }
}

#[test]
fn one_pointed_genus_one() {
    let push = table(1, 1, Variant::Open, Direction::Push);
    assert_eq!(push.nonzero(), vec![(0, 0, 1)]);
    let pull = table(1, 1, Variant::Open, Direction::Pull);
    assert_eq!(pull.nonzero(), vec![(2, 2, 1)]);
    let rep = duality_check(&push, &pull, 1, 1);
    assert!(rep.ok, "{rep:?}");
}

#[test]
fn loop_graph_term_of_one_pointed_genus_one() {
    let art = Artifacts::new();
    let dims: Vec<usize> = (0..=1).map(|p| Page::build(&art, 1, 1, 2, p, &[1], Variant::Open, Direction::Push).unwrap().dim()).collect();
    assert_eq!(dims, vec![1, 1]);
    assert_eq!(Page::build(&art, 1, 1, 0, 0, &[1], Variant::Open, Direction::Push).unwrap().dim(), 1);
}

#[test]
fn four_pointed_genus_zero_duality() {
    let push = table(0, 4, Variant::Open, Direction::Push);
    let pull = table(0, 4, Variant::Open, Direction::Pull);
    assert_eq!(push.get(2, 1, &[1, 1, 1, 1]), 2);
    assert_eq!(pull.get(0, 1, &[1, 1, 1, 1]), 2);
    assert!(duality_check(&push, &pull, 0, 4).ok);
}

#[test]
fn duality_reports_mismatch() {
    let push = table(0, 4, Variant::Open, Direction::Push);
    let mut pull = table(0, 4, Variant::Open, Direction::Pull);
    let e = pull.entries.iter_mut().find(|e| e.q == 0 && e.r == 1).unwrap();
    e.sectors.insert("[1,1,1,1]".into(), 3);
    let rep = duality_check(&push, &pull, 0, 4);
    assert!(!rep.ok);
    assert_eq!(rep.mismatches, vec![(2, 1, "[1,1,1,1]".to_string(), 2, 3)]);
}

fn check_d_squared(g: u32, n: usize, lambda: &[usize]) {
    let d = 3 * g as usize + n - 3;
    for variant in Variant::ALL {
        for dir in [Direction::Push, Direction::Pull] {
            let art = Artifacts::new();
            for q in (0..=2 * d).step_by(2) {
                let pages: Vec<Page> = (0..=d + 1).map(|p| Page::build(&art, g, n, q, p, lambda, variant, dir).unwrap()).collect();
                for p in 0..pages.len() {
                    let (a, b, c) = match dir {
                        Direction::Push if p >= 2 => (&pages[p], &pages[p - 1], &pages[p - 2]),
                        Direction::Pull if p + 2 < pages.len() => (&pages[p], &pages[p + 1], &pages[p + 2]),
                        _ => continue,
                    };
                    assert!(composite_vanishes(&art, a, b, c).unwrap(), "({g},{n}) {variant} {dir} q={q} p={p} {lambda:?}");
                }
            }
        }
    }
}

#[test]
fn differential_squares_to_zero() {
    check_d_squared(0, 5, &[1; 5]);
    check_d_squared(1, 2, &[1, 1]);
    check_d_squared(1, 2, &[2]);
    check_d_squared(2, 0, &[]);
    check_d_squared(0, 5, &[3, 2]);
}

#[test]
fn genus_two_tables_are_dual() {
    let push = table(2, 0, Variant::Open, Direction::Push);
    let pull = table(2, 0, Variant::Open, Direction::Pull);
    assert!(push.euler_invariant() && pull.euler_invariant());
    let rep = duality_check(&push, &pull, 2, 0);
    assert!(rep.ok, "{rep:?}");
}

#[test]
fn variant_coherence() {
    assert_eq!(table(2, 0, Variant::Rt, Direction::Push).entries, table(2, 0, Variant::Open, Direction::Push).entries);
    assert_eq!(table(1, 1, Variant::Ct, Direction::Pull).entries, table(1, 1, Variant::Open, Direction::Pull).entries);
}

#[test]
fn sectors_decompose_on_five_points() {
    let art = Artifacts::new();
    let req = TableRequest::new(0, 5, Variant::Open, Direction::Push, vec![2]).all_sectors();
    let t = e2_table(&art, &req).unwrap();
    let e = t.entry(2, 1).unwrap();
    // H^1(M_{0,5}) is the five-dimensional s[3,2]
    assert_eq!(e.polynomial.as_deref(), Some("s[3,2]*L^1"), "{e:?}");
}

#[test]
fn colors_of_partitions() {
    assert_eq!(colors(&[3, 2]), vec![0, 0, 0, 1, 1]);
    assert!(colors(&[]).is_empty());
}

#[test]
fn artifacts_are_reused_across_variants() {
    let art = Artifacts::new();
    let req = TableRequest::new(1, 2, Variant::Open, Direction::Pull, (0..=4).collect());
    e2_table(&art, &req).unwrap();
    art.reset_stats();
    for v in [Variant::Ct, Variant::Rt] {
        e2_table(&art, &TableRequest { variant: v, ..req.clone() }).unwrap();
    }
    assert!(art.stats().reuse() >= 0.9, "{:?}", art.stats());
}
