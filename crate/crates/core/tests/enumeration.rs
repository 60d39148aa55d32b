//! Exhaustive small-instance oracle: enumerate every assignment of `n`
//! users to `m` superslots and compare the analytic reliability against
//! the exact average. Independent of the library's evaluation path.

use gfaloha_core::{reliability, ProtocolConfig};

/// Exact reliability by enumerating all m^n equiprobable assignments; a
/// user is resolved iff its superslot holds at most `k` users.
fn enumerate_reliability(m: u32, k: u32, n: u32) -> f64 {
    let total = (m as u64).pow(n);
    let mut resolved_sum = 0u64;
    let mut choice = vec![0u32; n as usize];
    for _ in 0..total {
        let mut occupancy = vec![0u32; m as usize];
        for &c in &choice {
            occupancy[c as usize] += 1;
        }
        resolved_sum += occupancy
            .iter()
            .filter(|&&occ| occ > 0 && occ <= k)
            .map(|&occ| occ as u64)
            .sum::<u64>();
        // Next assignment (odometer in base m).
        for slot in choice.iter_mut() {
            *slot += 1;
            if *slot < m {
                break;
            }
            *slot = 0;
        }
    }
    resolved_sum as f64 / (total as f64 * n as f64)
}

/// Frame with exactly `m` superslots of order `k`: g = m channels over
/// L = k slots.
fn frame(m: u32, k: u32) -> ProtocolConfig {
    let cfg = ProtocolConfig::new(m, k, k).unwrap();
    assert_eq!(cfg.superslot_count().unwrap(), m as u64);
    cfg
}

#[test]
fn analytic_reliability_equals_exhaustive_enumeration() {
    for m in 1u32..=4 {
        for k in 1u32..=3 {
            let cfg = frame(m, k);
            for n in 1u32..=6 {
                let exact = enumerate_reliability(m, k, n);
                let analytic = reliability::known_count(&cfg, n).unwrap();
                assert!(
                    (analytic - exact).abs() <= 1e-12,
                    "m={m} K={k} n={n}: analytic {analytic} vs exact {exact}"
                );
            }
        }
    }
}

#[test]
fn per_superslot_expectation_matches_enumeration() {
    // Enumerate the expected resolved count inside superslot 0.
    fn enumerate_per_superslot(m: u32, k: u32, n: u32) -> f64 {
        let total = (m as u64).pow(n);
        let mut resolved_here = 0u64;
        let mut choice = vec![0u32; n as usize];
        for _ in 0..total {
            let occ = choice.iter().filter(|&&c| c == 0).count() as u32;
            if occ > 0 && occ <= k {
                resolved_here += occ as u64;
            }
            for slot in choice.iter_mut() {
                *slot += 1;
                if *slot < m {
                    break;
                }
                *slot = 0;
            }
        }
        resolved_here as f64 / total as f64
    }

    for m in 1u32..=4 {
        for k in 1u32..=3 {
            let q = 1.0 / m as f64;
            for n in 0u32..=6 {
                let got = reliability::expected_resolved_per_superslot(n, q, k);
                let want = enumerate_per_superslot(m, k, n);
                assert!(
                    (got - want).abs() <= 1e-12,
                    "m={m} K={k} n={n}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn reliability_monotone_in_channels() {
    for k in [1u32, 2, 3, 5] {
        for n in [2u32, 5, 12, 30] {
            let mut prev = 0.0;
            for g in 1..=40 {
                let cfg = ProtocolConfig::new(g, 5, k).unwrap();
                if cfg.superslot_count().is_err() {
                    continue;
                }
                let r = reliability::known_count(&cfg, n).unwrap();
                assert!(
                    r >= prev - 1e-12,
                    "K={k} n={n}: r({g}) = {r} < r({}) = {prev}",
                    g - 1
                );
                prev = r;
            }
        }
    }
}

#[test]
fn reliability_nonincreasing_in_batch_beyond_mpr() {
    for (g, l, k) in [(10u32, 5u32, 1u32), (10, 5, 5), (40, 5, 10), (3, 4, 2)] {
        let cfg = ProtocolConfig::new(g, l, k).unwrap();
        let mut prev = 1.0f64;
        for n in k..=300 {
            let r = reliability::known_count(&cfg, n.max(1)).unwrap();
            assert!(
                r <= prev + 1e-12,
                "g={g} K={k}: r({n}) = {r} rises above {prev}"
            );
            prev = r;
        }
    }
}
