use adlab::auction::{
    allocate, min_sne_bids, min_sne_revenue, sorted_scores, verify_sne, BidProfile, Bidder,
    BidderId, SlotCurve,
};
use adlab::capacity::{efficiency_after_fork, fork, ForkSpec};
use adlab::cli::table::format_sig;
use adlab::mediator::{plan_top, settle, MediatorScenario};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn curve_strategy(max_slots: usize) -> impl Strategy<Value = SlotCurve> {
    (0.5f64..=1.0, prop::collection::vec(0.3f64..0.95, 0..max_slots)).prop_map(|(top, ratios)| {
        let mut g = vec![top];
        for r in ratios {
            let last = *g.last().unwrap();
            g.push(last * r);
        }
        SlotCurve::new(g).unwrap()
    })
}

fn bidders_strategy(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Bidder>> {
    prop::collection::vec((1.0f64..50.0, 0.3f64..=1.0), n).prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (v, e))| Bidder::new(i as u32 + 1, v, e).unwrap())
            .collect()
    })
}

fn scaled(bidders: &[Bidder], c: f64) -> Vec<Bidder> {
    bidders
        .iter()
        .map(|b| Bidder::new(b.id.0, b.value() * c, b.relevance()).unwrap())
        .collect()
}

proptest! {
    #[test]
    fn min_sne_profile_is_an_equilibrium(
        curve in curve_strategy(6),
        bidders in bidders_strategy(2..10),
    ) {
        let profile = min_sne_bids(&curve, &bidders).unwrap();
        let report = verify_sne(&curve, &bidders, &profile, 1e-7).unwrap();
        prop_assert!(report.locally_envy_free(), "{:?}", report.first_violation());
    }

    #[test]
    fn revenue_formula_matches_allocation(
        curve in curve_strategy(6),
        bidders in bidders_strategy(2..10),
    ) {
        let profile = min_sne_bids(&curve, &bidders).unwrap();
        let direct = allocate(&curve, &bidders, &profile).unwrap().revenue();
        let formula = min_sne_revenue(curve.as_slice(), &sorted_scores(&bidders));
        prop_assert!((direct - formula).abs() <= 1e-9 * (1.0 + formula.abs()));
    }

    #[test]
    fn scaling_values_scales_the_minimum_equilibrium(
        curve in curve_strategy(5),
        bidders in bidders_strategy(2..8),
        c in 0.1f64..10.0,
    ) {
        let base = min_sne_bids(&curve, &bidders).unwrap();
        let big = scaled(&bidders, c);
        let grown = min_sne_bids(&curve, &big).unwrap();
        for (a, b) in base.entries().iter().zip(grown.entries()) {
            prop_assert_eq!(a.id, b.id);
        }
        // The top bid is r_2 + 1, so only ranks below it scale exactly.
        for (a, b) in base.entries().iter().zip(grown.entries()).skip(1) {
            prop_assert!((a.score * c - b.score).abs() <= 1e-9 * (1.0 + b.score));
        }
        let report = verify_sne(&curve, &big, &grown, 1e-7).unwrap();
        prop_assert!(report.locally_envy_free());
    }

    #[test]
    fn fork_keeps_the_multiset_and_capacity(
        curve in curve_strategy(6),
        slot_pick in 0usize..6,
        extra_pick in 0usize..6,
        f_frac in 0.01f64..0.99,
    ) {
        let k = curve.slots();
        let slot = slot_pick % k + 1;
        let extra = extra_pick % k + 1;
        let spec = ForkSpec::new(slot, extra, f_frac / curve.gamma(1));
        let merged = match fork(&curve, &spec) {
            Ok(m) => m,
            Err(_) => return Ok(()),
        };
        let gl = curve.gamma(slot);
        let mut expected: Vec<f64> = (1..=k).filter(|&j| j != slot).map(|j| curve.gamma(j)).collect();
        expected.extend((1..=extra).map(|j| gl * spec.fitness * curve.gamma(j)));
        expected.sort_by(|a, b| b.total_cmp(a));
        prop_assert_eq!(merged.as_slice(), &expected[..]);

        let landing: f64 = (1..=extra).map(|j| curve.gamma(j)).sum();
        let cap = curve.capacity() - gl + gl * spec.fitness * landing;
        prop_assert!((merged.capacity() - cap).abs() <= TOL);
    }

    #[test]
    fn efficiency_grows_with_fitness(
        curve in curve_strategy(5),
        slot_pick in 0usize..5,
        extra_pick in 0usize..5,
        fs in (0.01f64..0.98, 0.01f64..0.98),
        mut scores in prop::collection::vec(0.5f64..30.0, 2..12),
    ) {
        scores.sort_by(|a, b| b.total_cmp(a));
        let k = curve.slots();
        let spec = ForkSpec::new(slot_pick % k + 1, extra_pick % k + 1, 0.0);
        let (lo, hi) = if fs.0 <= fs.1 { fs } else { (fs.1, fs.0) };
        let at = |frac: f64| {
            fork(&curve, &spec.with_fitness(frac / curve.gamma(1)))
                .ok()
                .map(|m| efficiency_after_fork(&m, &scores))
        };
        if let (Some(a), Some(b)) = (at(lo), at(hi)) {
            prop_assert!(b >= a - TOL, "{a} > {b}");
        }
    }

    #[test]
    fn settlement_conserves_savings(
        extra in 0usize..4,
        share in 0.05f64..0.95,
        clicks in prop::collection::vec(0u64..10_000, 5),
    ) {
        // Reference auction, coalition of the top 2 to 5 bidders.
        let gammas = [1.0, 0.6, 0.5, 0.4, 0.3, 0.2, 0.15, 0.1];
        let values = [26.0, 22.0, 20.0, 18.0, 17.0, 15.0, 12.0, 12.0, 9.0];
        let bids = [25.0, 20.0, 16.0, 15.0, 14.0, 13.0, 11.0, 10.0, 9.0];
        let curve = SlotCurve::new(gammas.to_vec()).unwrap();
        let bidders: Vec<Bidder> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| Bidder::new(i as u32 + 1, v, 1.0).unwrap())
            .collect();
        let profile = BidProfile::from_bids(
            &bidders,
            &bids.iter().enumerate().map(|(i, &b)| (BidderId(i as u32 + 1), b)).collect::<Vec<_>>(),
        )
        .unwrap();
        let size = 2 + extra;
        let members = (1..=size as u32).map(BidderId);
        let scenario = MediatorScenario::new(curve, bidders, profile, members, share).unwrap();
        let Some(plan) = plan_top(&scenario).unwrap().into_plan() else {
            return Ok(());
        };
        let events: Vec<(BidderId, u64)> = (1..=size as u32).map(BidderId).zip(clicks.iter().copied()).collect();
        let ledger = settle(&plan, &events).unwrap();
        prop_assert!(ledger.conservation_error() <= 1e-6 * (1.0 + ledger.total_savings));
        prop_assert!((ledger.mediator_total - share * ledger.total_savings).abs() <= 1e-6 * (1.0 + ledger.total_savings));
        prop_assert!(ledger.rebates.values().all(|&r| r >= 0.0));
    }

    #[test]
    fn six_digit_format_is_close(x in -1e12f64..1e12, exp in -8i32..8) {
        let y = x * 10f64.powi(exp);
        let back: f64 = format_sig(y, 6).parse().unwrap();
        prop_assert!((back - y).abs() <= 5e-6 * y.abs() + f64::MIN_POSITIVE);
    }
}
