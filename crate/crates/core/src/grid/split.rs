use super::{CoalPlantSpec, GeneratorSpec, GridError, OfferBlock};

/// Splits a coal plant into Unit I, spanning `[g_min, eol]`, and Unit II,
/// spanning `[0, g_max - eol]`.
///
/// The offer curve is cut at cumulative quantity `eol`; a block straddling
/// the cut is divided in two so the parent cost curve is preserved exactly.
/// Commitment costs stay with the parent plant, so both units carry zero
/// no-load, startup and shutdown costs.
pub fn split_coal_plant(spec: &CoalPlantSpec) -> Result<(GeneratorSpec, GeneratorSpec), GridError> {
    let base = &spec.base;
    if !(base.g_min < spec.eol && spec.eol < base.g_max) {
        return Err(GridError::EolOutOfRange {
            id: base.id.clone(),
            eol: spec.eol,
            g_min: base.g_min,
            g_max: base.g_max,
        });
    }

    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut cumulative = 0.0;
    for block in &base.offer_blocks {
        let start = cumulative;
        let end = cumulative + block.quantity;
        cumulative = end;
        if end <= spec.eol {
            lower.push(*block);
        } else if start >= spec.eol {
            upper.push(*block);
        } else {
            lower.push(OfferBlock {
                quantity: spec.eol - start,
                price: block.price,
            });
            upper.push(OfferBlock {
                quantity: end - spec.eol,
                price: block.price,
            });
        }
    }

    let unit = |suffix: &str, g_min: f64, g_max: f64, blocks: Vec<OfferBlock>, initial: f64| {
        GeneratorSpec {
            id: format!("{}/{suffix}", base.id),
            g_min,
            g_max,
            no_load_cost: 0.0,
            startup_cost: 0.0,
            shutdown_cost: 0.0,
            offer_blocks: blocks,
            initial_output: initial,
            ..base.clone()
        }
    };
    let init_i = base.initial_output.min(spec.eol);
    let init_ii = (base.initial_output - spec.eol).max(0.0);
    let unit_i = unit("I", base.g_min, spec.eol, lower, init_i);
    let unit_ii = unit("II", 0.0, base.g_max - spec.eol, upper, init_ii);

    debug_assert!(
        match (unit_i.offer_blocks.last(), unit_ii.offer_blocks.first()) {
            (Some(a), Some(b)) => b.price >= a.price,
            _ => true,
        },
        "split must keep the combined cost curve convex"
    );
    Ok((unit_i, unit_ii))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emission::{DynamicEmissionParams, StaticEmissionParams};
    use crate::grid::{offer_cost, GenKind};
    use proptest::prelude::*;

    fn plant(g_min: f64, g_max: f64, eol: f64, blocks: &[(f64, f64)]) -> CoalPlantSpec {
        CoalPlantSpec {
            base: GeneratorSpec {
                id: "G1".into(),
                bus: 1,
                kind: GenKind::Coal,
                g_min,
                g_max,
                ramp_limit: 4.0,
                no_load_cost: 100.0,
                startup_cost: 2000.0,
                shutdown_cost: 0.0,
                min_uptime: 8,
                min_downtime: 8,
                offer_blocks: blocks
                    .iter()
                    .map(|&(quantity, price)| OfferBlock { quantity, price })
                    .collect(),
                initial_commitment: true,
                initial_output: 20.0,
                hours_in_initial_state: 1,
            },
            eol,
            static_params: StaticEmissionParams::REFERENCE,
            dynamic_params: DynamicEmissionParams::REFERENCE,
            emission_breakpoints: Vec::new(),
        }
    }

    fn blocks(g: &GeneratorSpec) -> Vec<(f64, f64)> {
        g.offer_blocks.iter().map(|b| (b.quantity, b.price)).collect()
    }

    #[test]
    fn gen1_partition_at_thirty() {
        let p = plant(10.0, 60.0, 30.0, &[(25.0, 7.0), (20.0, 10.0), (15.0, 15.0)]);
        let (i, ii) = split_coal_plant(&p).unwrap();
        assert_eq!(blocks(&i), vec![(25.0, 7.0), (5.0, 10.0)]);
        assert_eq!(blocks(&ii), vec![(15.0, 10.0), (15.0, 15.0)]);
        assert_eq!((i.g_min, i.g_max), (10.0, 30.0));
        assert_eq!((ii.g_min, ii.g_max), (0.0, 30.0));
        assert_eq!(i.startup_cost + ii.startup_cost + i.no_load_cost, 0.0);
        assert_eq!(i.initial_output, 20.0);
        assert_eq!(ii.initial_output, 0.0);
    }

    #[test]
    fn symmetric_single_block_halves() {
        let p = plant(0.0, 40.0, 20.0, &[(40.0, 9.0)]);
        let (i, ii) = split_coal_plant(&p).unwrap();
        assert_eq!(blocks(&i), vec![(20.0, 9.0)]);
        assert_eq!(blocks(&ii), vec![(20.0, 9.0)]);
        assert_eq!(i.g_max, ii.g_max);
    }

    #[test]
    fn eol_outside_range_is_rejected() {
        for eol in [5.0, 10.0, 60.0, 70.0] {
            let p = plant(10.0, 60.0, eol, &[(60.0, 7.0)]);
            assert!(matches!(
                split_coal_plant(&p),
                Err(GridError::EolOutOfRange { .. })
            ));
        }
    }

    proptest! {
        #[test]
        fn split_conserves_quantity_and_cost(
            raw in proptest::collection::vec((1.0f64..40.0, 0.0f64..30.0), 1..5),
            frac in 0.05f64..0.95,
            g_frac in 0.0f64..1.0,
        ) {
            // non-decreasing prices
            let mut price = 0.0;
            let bl: Vec<(f64, f64)> = raw.iter().map(|&(q, dp)| { price += dp; (q, price) }).collect();
            let total: f64 = bl.iter().map(|b| b.0).sum();
            let eol = total * frac;
            let p = plant(0.0, total, eol, &bl);
            let (i, ii) = split_coal_plant(&p).unwrap();
            let qi: f64 = i.offer_blocks.iter().map(|b| b.quantity).sum();
            let qii: f64 = ii.offer_blocks.iter().map(|b| b.quantity).sum();
            prop_assert!((qi + qii - total).abs() < 1e-9);
            let g = total * g_frac;
            let parent = offer_cost(&p.base.offer_blocks, g);
            let split = offer_cost(&i.offer_blocks, g.min(eol)) + offer_cost(&ii.offer_blocks, (g - eol).max(0.0));
            prop_assert!((parent - split).abs() <= 1e-9 * parent.abs().max(1.0));
            if let (Some(a), Some(b)) = (i.offer_blocks.last(), ii.offer_blocks.first()) {
                prop_assert!(b.price >= a.price);
            }
        }
    }
}
