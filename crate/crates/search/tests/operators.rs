use glyphpress_core::config::{validate, RenderConfig, FONT_SIZES_PT};
use glyphpress_search::landscape::synthetic_space;
use glyphpress_search::ops::{mutate_in, repair};
use glyphpress_search::{crossover, heuristic_mutate, Field, SearchSpace};
use proptest::prelude::*;

fn conforms(c: &RenderConfig) -> bool {
    let extra = c.line_height_pt - c.font_size_pt;
    validate(c).valid && FONT_SIZES_PT.contains(&c.font_size_pt) && [0.0, 1.0, 2.0, 3.0].contains(&extra)
}

/// Fields outside the space keep the base value.
fn inactive_untouched(c: &RenderConfig, space: &SearchSpace) -> bool {
    let base = space.base.as_ref().unwrap();
    Field::ALL.iter().filter(|f| !space.fields.contains(f)).all(|f| {
        let mut probe = c.clone();
        f.copy(base, &mut probe);
        probe == *c
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn sampled_and_mutated_configs_conform(seed: u64, mseed: u64) {
        let full = SearchSpace::full();
        let c = full.sample(seed).unwrap();
        prop_assert!(conforms(&c));
        let m = heuristic_mutate(&c, mseed);
        prop_assert!(conforms(&m));
        prop_assert_ne!(m, c);
    }

    #[test]
    fn crossover_children_conform(a: u64, b: u64, seed: u64) {
        let full = SearchSpace::full();
        let child = crossover(&full.sample(a).unwrap(), &full.sample(b).unwrap(), seed);
        prop_assert!(conforms(&child));
    }

    #[test]
    fn restricted_space_is_respected(seed: u64, mseed: u64) {
        let space = synthetic_space();
        let c = space.sample(seed).unwrap();
        prop_assert!(inactive_untouched(&c, &space));
        let m = mutate_in(&c, &space, mseed);
        prop_assert!(conforms(&m));
        prop_assert!(inactive_untouched(&m, &space));
        prop_assert!((space.dpi_min..=space.dpi_max).contains(&m.dpi));
    }

    #[test]
    fn repair_fixes_off_grid_typography(fs in 1.0f64..40.0, extra in -3.0f64..8.0, dpi in 0i64..2000) {
        let space = SearchSpace::full();
        let mut c = RenderConfig { font_size_pt: fs, line_height_pt: fs + extra, dpi, ..RenderConfig::default() };
        repair(&mut c, &space);
        prop_assert!(conforms(&c));
    }
}
