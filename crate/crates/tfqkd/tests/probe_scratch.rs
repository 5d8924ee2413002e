// Temporary parameter-space probe; deleted before shipping.
use tfqkd::{evaluate_point, plob_bound, worst_case_rate, BoundModel, RunConfig};

#[test]
#[ignore]
fn probe_mu_pz() {
    // Criterion-3-style config: N=1e12, P_d=1e-7, mult Chernoff.
    println!("=== N=1e12 P_d=1e-7 mult_chernoff: loss window where R > PLOB ===");
    for &mu_z in &[0.005, 0.008, 0.01, 0.015, 0.02, 0.03, 0.05] {
        for &p_z in &[0.6, 0.75, 0.9] {
            let mut cfg = RunConfig::default();
            cfg.protocol.n = 1e12;
            cfg.protocol.p_d = 1e-7;
            cfg.protocol.mu_z = mu_z;
            cfg.protocol.p_z = p_z;
            let mut first = None;
            let mut last = None;
            let mut max_ratio: f64 = 0.0;
            for loss in 1..=80 {
                let loss_db = loss as f64;
                let r = evaluate_point(&cfg, loss_db, BoundModel::MultChernoff).unwrap();
                let plob = plob_bound(r.diag.eta).unwrap();
                if r.rate > plob {
                    if first.is_none() {
                        first = Some(loss_db);
                    }
                    last = Some(loss_db);
                    max_ratio = max_ratio.max(r.rate / plob);
                }
            }
            println!(
                "mu_z={mu_z:<6} p_z={p_z:<5} beats PLOB: {first:?}..{last:?} max R/PLOB = {max_ratio:.2}"
            );
        }
    }
}

#[test]
#[ignore]
fn probe_azuma_fluct() {
    // Criterion-5-style config: N=1e15, P_d=1e-8, worst-case delta=0.
    for trials in ["detections", "per_setting"] {
        println!("=== N=1e15 P_d=1e-8 azuma({trials}) delta=0: R vs PLOB ===");
        for &mu_z in &[0.008, 0.01, 0.015, 0.02] {
            for &p_z in &[0.6, 0.75] {
                let mut cfg = RunConfig::default();
                cfg.protocol.n = 1e15;
                cfg.protocol.p_d = 1e-8;
                cfg.protocol.mu_z = mu_z;
                cfg.protocol.p_z = p_z;
                cfg.azuma_trials = trials.parse().unwrap();
                let mut first = None;
                let mut last = None;
                let mut max_ratio: f64 = 0.0;
                let mut max_loss_positive = 0.0;
                for loss in 1..=90 {
                    let loss_db = loss as f64;
                    let w = worst_case_rate(&cfg, loss_db, 3).unwrap();
                    let plob = plob_bound(w.result.diag.eta).unwrap();
                    if w.result.rate > 0.0 {
                        max_loss_positive = loss_db;
                    }
                    if w.result.rate > plob {
                        if first.is_none() {
                            first = Some(loss_db);
                        }
                        last = Some(loss_db);
                        max_ratio = max_ratio.max(w.result.rate / plob);
                    }
                }
                println!(
                    "mu_z={mu_z:<6} p_z={p_z:<5} beats: {first:?}..{last:?} max R/PLOB = {max_ratio:.2} positive to {max_loss_positive} dB"
                );
            }
        }
    }
}

#[test]
#[ignore]
fn probe_model_ordering() {
    // Criterion-4-style: improved >= mult and >= hoeffding pointwise.
    for &n in &[1e13, 1e14] {
        let mut cfg = RunConfig::default();
        cfg.protocol.n = n;
        let mut all_pos = 0;
        let mut viol_mult = 0;
        let mut viol_hoef = 0;
        let mut worst_gap: f64 = 0.0;
        for loss in 0..=80 {
            let loss_db = loss as f64;
            let h = evaluate_point(&cfg, loss_db, BoundModel::Hoeffding).unwrap();
            let m = evaluate_point(&cfg, loss_db, BoundModel::MultChernoff).unwrap();
            let i = evaluate_point(&cfg, loss_db, BoundModel::ImprovedChernoff).unwrap();
            if h.rate > 0.0 && m.rate > 0.0 && i.rate > 0.0 {
                all_pos += 1;
                if i.rate < m.rate - 1e-15 {
                    viol_mult += 1;
                    worst_gap = worst_gap.max(m.rate - i.rate);
                }
                if i.rate < h.rate - 1e-15 {
                    viol_hoef += 1;
                    worst_gap = worst_gap.max(h.rate - i.rate);
                }
            }
        }
        println!(
            "N={n:e}: all-positive points {all_pos}, improved<mult {viol_mult}, improved<hoeffding {viol_hoef}, worst gap {worst_gap:e}"
        );
    }
}

#[test]
#[ignore]
fn probe_fig1_n_ordering() {
    // R(N=1e13) >= R(N=1e12) pointwise, mult Chernoff.
    let mut viol = 0;
    for loss in 0..=80 {
        let mut r = [0.0; 2];
        for (k, &n) in [1e12, 1e13].iter().enumerate() {
            let mut cfg = RunConfig::default();
            cfg.protocol.n = n;
            cfg.protocol.p_d = 1e-7;
            r[k] = evaluate_point(&cfg, loss as f64, BoundModel::MultChernoff)
                .unwrap()
                .rate;
        }
        if r[1] < r[0] {
            viol += 1;
            println!("loss {loss}: R(1e13)={:e} < R(1e12)={:e}", r[1], r[0]);
        }
    }
    println!("N-ordering violations: {viol}");
}

#[test]
#[ignore]
fn probe_crit5_crit6() {
    // Criterion 5: N=1e15, P_d=1e-8, delta in {0,0.1,0.2,0.3}.
    let mut rates: Vec<Vec<f64>> = Vec::new();
    for &delta in &[0.0, 0.1, 0.2, 0.3] {
        let mut cfg = RunConfig::default();
        cfg.protocol.n = 1e15;
        cfg.protocol.p_d = 1e-8;
        cfg.protocol.delta_mu = delta;
        let row: Vec<f64> = (0..=80)
            .map(|l| worst_case_rate(&cfg, l as f64, 3).unwrap().result.rate)
            .collect();
        rates.push(row);
    }
    let mut viol = 0;
    for d in 1..4 {
        for l in 0..=80 {
            if rates[d][l] > rates[d - 1][l] {
                viol += 1;
                println!("delta ordering violated at d-index {d} loss {l}: {} > {}", rates[d][l], rates[d-1][l]);
            }
        }
    }
    let maxloss = |row: &Vec<f64>| row.iter().rposition(|&r| r > 0.0).unwrap_or(0);
    println!(
        "crit5: delta-ordering violations {viol}; max positive loss delta0={} delta0.3={}",
        maxloss(&rates[0]),
        maxloss(&rates[3])
    );
    // delta=0 beats PLOB somewhere?
    let mut cfg = RunConfig::default();
    cfg.protocol.n = 1e15;
    cfg.protocol.p_d = 1e-8;
    let beats = (1..=80).any(|l| {
        let w = worst_case_rate(&cfg, l as f64, 3).unwrap();
        w.result.rate > plob_bound(w.result.diag.eta).unwrap()
    });
    println!("crit5: delta=0 beats PLOB somewhere: {beats}");

    // Criterion 6: delta=0.1, N in {1e13..1e16}: positive-range and rates
    // non-decreasing in N.
    let mut rates6: Vec<Vec<f64>> = Vec::new();
    for &n in &[1e13, 1e14, 1e15, 1e16] {
        let mut cfg = RunConfig::default();
        cfg.protocol.n = n;
        cfg.protocol.p_d = 1e-8;
        cfg.protocol.delta_mu = 0.1;
        let row: Vec<f64> = (0..=80)
            .map(|l| worst_case_rate(&cfg, l as f64, 3).unwrap().result.rate)
            .collect();
        rates6.push(row);
    }
    let mut viol6 = 0;
    for k in 1..4 {
        for l in 0..=80 {
            if rates6[k][l] < rates6[k - 1][l] {
                viol6 += 1;
                println!("N ordering violated at N-index {k} loss {l}");
            }
        }
    }
    let ranges: Vec<usize> = rates6.iter().map(maxloss).collect();
    println!("crit6: rate violations {viol6}; positive ranges {ranges:?}");
}
