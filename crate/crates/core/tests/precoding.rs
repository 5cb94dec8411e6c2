mod common;

use common::{c, columns, dominant_eigvecs, gram_schmidt, max_abs_inner, random_matrix};
use hrs_core::channel::ChannelSet;
use hrs_core::hrs::*;
use hrs_core::linalg::{norm, CMat};
use hrs_core::partition::{enumerate_partitions, Partition};
use proptest::prelude::*;

fn perfect(h: CMat) -> ChannelSet {
    let n = h.cols();
    ChannelSet::from_matrices(h.clone(), h, vec![0; n], 0.0).unwrap()
}

fn part(key: &str) -> Partition {
    key.parse().unwrap()
}

#[test]
fn single_group_outer_is_identity() {
    let h = random_matrix(4, 3, 1);
    let p = Partition::universal(3);
    let cfg = HrsConfig::with_power(10.0);
    let dims = cfg.check_feasible(4, &p).unwrap();
    assert_eq!(dims.b, vec![4]);
    let outer = compute_outer_precoders(&group_channels(&h, &p), &dims).unwrap();
    assert_eq!(outer[0], CMat::identity(4));
}

#[test]
fn orthogonal_groups_do_not_leak() {
    // users 1,2 live on antennas 0..4, users 3,4 on antennas 4..8
    let a = random_matrix(4, 2, 2);
    let b = random_matrix(4, 2, 3);
    let h = CMat::from_fn(8, 4, |r, col| match (r < 4, col < 2) {
        (true, true) => a[(r, col)],
        (false, false) => b[(r - 4, col - 2)],
        _ => c(0.0, 0.0),
    });
    let p = part("1,2|3,4");
    let cfg = HrsConfig {
        dims: DimensionRule::Fixed { b: vec![4, 4], r: vec![2, 2] },
        ..HrsConfig::with_power(10.0)
    };
    let dims = cfg.check_feasible(8, &p).unwrap();
    let grouped = group_channels(&h, &p);
    let outer = compute_outer_precoders(&grouped, &dims).unwrap();
    for g in 0..2 {
        let leak = outer[g].adjoint_mul(&grouped[1 - g]);
        assert!(leak.frobenius() < 1e-8, "group {g} leaks {}", leak.frobenius());
    }
}

#[test]
fn outer_precoder_nulls_dominant_directions() {
    let cfg = HrsConfig::with_power(10.0);
    for (seed, key) in [(10u64, "1,2,3|4,5,6"), (11, "1,2,3,4,5|6,7,8"), (12, "1,3,5,7,8|2,4,6")] {
        let p = part(key);
        let h = random_matrix(8, p.num_users(), seed);
        let dims = cfg.check_feasible(8, &p).unwrap();
        let grouped = group_channels(&h, &p);
        let outer = compute_outer_precoders(&grouped, &dims).unwrap();
        for g in 0..2 {
            let other = &grouped[1 - g];
            let r = dims.r[1 - g];
            let nulled = if other.cols() <= r {
                gram_schmidt(&columns(other))
            } else {
                dominant_eigvecs(&other.mul_adjoint(other), r, 3000)
            };
            assert_eq!(nulled.len(), r.min(other.cols()));
            for col in columns(&outer[g]) {
                assert!(max_abs_inner(&col, &nulled) < 1e-8, "{key} group {g}");
            }
            let gram = outer[g].adjoint_mul(&outer[g]);
            assert!(gram.sub(&CMat::identity(dims.b[g])).frobenius() < 1e-9);
        }
    }
}

#[test]
fn single_user_rzf_is_matched_filter() {
    let e1 = CMat::from_fn(2, 1, |r, _| c(if r == 0 { 1.0 } else { 0.0 }, 0.0));
    let pre = compute_inner_precoders(&[CMat::identity(2)], &[e1.clone()], &HrsConfig::with_power(1.0)).unwrap();
    assert!(pre.private[0].sub(&e1).frobenius() < 1e-12);
    assert!((pre.inner_common[0][0] - c(1.0, 0.0)).norm() < 1e-12);
    assert!(pre.inner_common[0][1].norm() < 1e-12);
}

#[test]
fn large_regularisation_gives_matched_filter() {
    let h = random_matrix(6, 3, 21);
    let cfg = HrsConfig { epsilon: EpsilonRule::Fixed(1e6), ..HrsConfig::with_power(10.0) };
    let pre = compute_inner_precoders(&[CMat::identity(6)], &[h.clone()], &cfg).unwrap();
    for k in 0..3 {
        let mf: Vec<_> = h.col(k).iter().map(|z| z / norm(h.col(k))).collect();
        let err: f64 = pre.private[0].col(k).iter().zip(&mf).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-4, "column {k}: {err}");
    }
}

#[test]
fn scalar_awgn_rate_is_one() {
    let h = CMat::from_fn(1, 1, |_, _| c(1.0, 0.0));
    let p = Partition::universal(1);
    let cfg = HrsConfig::with_power(1.0);
    let pre = build_precoders(&h, &p, &cfg).unwrap();
    let power = PowerAllocation::new(0.0, 0.0, 1.0, &p).unwrap();
    let r = compute_sinr_and_rate(&h, &p, &pre, &power).unwrap();
    assert!((r.r_total - 1.0).abs() < 1e-12);
    assert!((r.r_p - 1.0).abs() < 1e-12);
}

#[test]
fn two_orthogonal_singletons() {
    let h = CMat::identity(2);
    let p = Partition::singletons(2);
    let cfg = HrsConfig::with_power(10.0);
    let pre = build_precoders(&h, &p, &cfg).unwrap();
    let power = PowerAllocation::new(0.0, 0.0, 10.0, &p).unwrap();
    assert_eq!(power.p_priv, vec![5.0, 5.0]);
    let r = compute_sinr_and_rate(&h, &p, &pre, &power).unwrap();
    assert!((r.r_p - 2.0 * 6f64.log2()).abs() < 1e-12);
    assert_eq!(r.r_total, r.r_oc + r.r_ic + r.r_p);
}

#[test]
fn singletons_infeasible_when_users_exceed_antennas() {
    let ch = perfect(random_matrix(4, 8, 5));
    let r = evaluate_partition(&ch, &Partition::singletons(8), &HrsConfig::with_power(100.0)).unwrap();
    assert!(!r.feasible);
    assert_eq!(r.r_total, 0.0);
}

#[test]
fn grid_search_dominates_every_point() {
    let h = random_matrix(8, 5, 31);
    let ch = ChannelSet::from_matrices(h.clone(), h.sub(&random_matrix(8, 5, 32).scale(0.3)), vec![0; 5], 0.5).unwrap();
    let cfg = HrsConfig::with_power(100.0);
    for p in [part("1,2|3,4,5"), part("1|2|3,4,5"), Partition::universal(5)] {
        let best = evaluate_partition(&ch, &p, &cfg).unwrap();
        let pre = build_precoders(&ch.h_hat, &p, &cfg).unwrap();
        let table = GainTable::new(&ch.h_true, &p, &pre).unwrap();
        for &a in &cfg.alpha_grid {
            for &b in &cfg.beta_grid {
                let r = table.rates(&PowerAllocation::new(a, b, 100.0, &p).unwrap()).unwrap();
                assert!(best.r_total >= r.r_total - 1e-12);
            }
        }
    }
}

#[test]
fn orthogonal_groups_prefer_minimal_alpha() {
    let a = random_matrix(4, 2, 41);
    let b = random_matrix(4, 2, 42);
    let h = CMat::from_fn(8, 4, |r, col| match (r < 4, col < 2) {
        (true, true) => a[(r, col)],
        (false, false) => b[(r - 4, col - 2)],
        _ => c(0.0, 0.0),
    });
    let p = part("1,2|3,4");
    let cfg = HrsConfig::with_power(100.0);
    let ch = perfect(h);
    let best = evaluate_partition(&ch, &p, &cfg).unwrap();
    assert_eq!(best.best_alpha, cfg.alpha_grid[0]);

    let pre = build_precoders(&ch.h_hat, &p, &cfg).unwrap();
    let table = GainTable::new(&ch.h_true, &p, &pre).unwrap();
    let per_alpha: Vec<f64> = cfg
        .alpha_grid
        .iter()
        .map(|&a| {
            cfg.beta_grid
                .iter()
                .map(|&b| table.rates(&PowerAllocation::new(a, b, 100.0, &p).unwrap()).unwrap().r_total)
                .fold(f64::MIN, f64::max)
        })
        .collect();
    assert!(per_alpha.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{per_alpha:?}");
}

#[test]
fn precoder_norms_and_sic_denominators() {
    let cfg = HrsConfig::with_power(100.0);
    let mut checked = 0;
    for seed in 0..20u64 {
        let n = 3 + (seed % 4) as usize;
        let h = random_matrix(8, n, 100 + seed);
        let h_hat = h.sub(&random_matrix(8, n, 200 + seed).scale(0.4));
        let parts = enumerate_partitions(n).unwrap();
        let p = &parts[(seed as usize * 7) % parts.len()];
        let Ok(pre) = build_precoders(&h_hat, p, &cfg) else { continue };
        for w in &pre.private {
            for k in 0..w.cols() {
                assert!((norm(w.col(k)) - 1.0).abs() < 1e-9);
            }
        }
        for v in &pre.inner_common {
            assert!((norm(v) - 1.0).abs() < 1e-9);
        }
        assert!((norm(&pre.outer_common) - 1.0).abs() < 1e-9);
        let table = GainTable::new(&h, p, &pre).unwrap();
        let power = PowerAllocation::new(0.3, 0.6, 100.0, p).unwrap();
        for u in 0..n {
            let s = table.sinr(u, &power).unwrap();
            let [d_oc, d_ic, d_p] = s.denominators;
            assert!(d_ic <= d_oc + 1e-12 && d_p <= d_ic + 1e-12);
        }
        checked += 1;
    }
    assert!(checked >= 15);
}

#[test]
fn rate_grows_with_power() {
    let h = random_matrix(8, 6, 55);
    let cfg = HrsConfig::with_power(50.0);
    for key in ["1,2,3|4,5,6", "1,2|3,4|5,6", "1,2,3,4,5,6"] {
        let p = part(key);
        let pre = build_precoders(&h, &p, &cfg).unwrap();
        for (a, b) in [(0.001, 0.1), (0.3, 0.5), (0.9, 0.9)] {
            let lo = compute_sinr_and_rate(&h, &p, &pre, &PowerAllocation::new(a, b, 50.0, &p).unwrap()).unwrap();
            let hi = compute_sinr_and_rate(&h, &p, &pre, &PowerAllocation::new(a, b, 100.0, &p).unwrap()).unwrap();
            assert!(hi.r_total >= lo.r_total - 1e-12, "{key} ({a},{b})");
        }
    }
}

#[test]
fn relabeling_users_keeps_rate() {
    let h = random_matrix(8, 5, 61);
    let h_hat = h.sub(&random_matrix(8, 5, 62).scale(0.3));
    let ch = ChannelSet::from_matrices(h, h_hat, vec![0; 5], 0.5).unwrap();
    let cfg = HrsConfig::with_power(100.0);
    let perm = [3, 0, 4, 1, 2];
    let moved = ch.permute_users(&perm);
    let mut inverse = [0; 5];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    for key in ["1,2|3,4,5", "1,4|2|3,5", "1,2,3,4,5"] {
        let p = part(key);
        let blocks = p.blocks().iter().map(|b| b.iter().map(|&u| inverse[u]).collect()).collect();
        let q = Partition::new(blocks, 5).unwrap();
        let a = evaluate_partition(&ch, &p, &cfg).unwrap();
        let b = evaluate_partition(&moved, &q, &cfg).unwrap();
        assert!((a.r_total - b.r_total).abs() < 1e-9, "{key}: {} vs {}", a.r_total, b.r_total);
    }
}

proptest! {
    #[test]
    fn power_is_conserved(alpha in 0.0f64..=1.0, beta in 0.0f64..=1.0, power in 0.01f64..1e4, idx in 0usize..52) {
        let p = &enumerate_partitions(5).unwrap()[idx];
        let alloc = PowerAllocation::new(alpha, beta, power, p).unwrap();
        prop_assert!((alloc.total() - power).abs() <= 1e-9 * power);
        prop_assert!(alloc.p_priv.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn out_of_range_split_is_rejected(alpha in 1.0001f64..10.0) {
        let p = Partition::universal(2);
        prop_assert!(PowerAllocation::new(alpha, 0.5, 1.0, &p).is_err());
        prop_assert!(PowerAllocation::new(0.5, -alpha, 1.0, &p).is_err());
    }
}
