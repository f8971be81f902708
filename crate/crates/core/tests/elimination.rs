use exactgeom::elimination::{run_elimination, stage2_fiber_expected, twistor_line_degree};
use exactgeom::EngineError;

#[test]
fn terminates_at_stage_n_minus_two() {
    for n in 4..=12 {
        assert_eq!(run_elimination(n).unwrap().terminal_stage, n - 2, "n={n}");
    }
}

#[test]
fn rejects_small_n() {
    assert!(matches!(run_elimination(3), Err(EngineError::InvalidN { .. })));
}

#[test]
fn stage2_degrees_at_seven() {
    let t = run_elimination(7).unwrap();
    let mut cells = t.stage2_fiber_degrees.clone();
    cells.sort();
    assert_eq!(
        cells,
        vec![(3, 3, 0), (4, 3, 1), (4, 4, -1), (5, 3, 1), (5, 4, 0), (5, 5, -1)]
    );
    assert_eq!(t.stage2_ladder_degree, Some(-3));
}

#[test]
fn stage2_profile_away_from_first_row() {
    for n in 5..=12 {
        for &(i, j, d) in &run_elimination(n).unwrap().stage2_fiber_degrees {
            if i > 3 {
                assert_eq!(d, stage2_fiber_expected(i, j), "n={n} ({i},{j})");
            }
        }
    }
}

#[test]
fn ladder_degrees_rise_by_one_per_stage() {
    for n in 4..=12 {
        let t = run_elimination(n).unwrap();
        for l in &t.ladders {
            assert_eq!(l.components.len(), n - 3);
            let expected: Vec<i64> = (2..=n - 2).map(|m| 4 - n as i64 + (m as i64 - 2)).collect();
            assert_eq!(l.curve_degrees, expected, "n={n}");
        }
    }
}

#[test]
fn base_curves_drop_by_one_until_zero() {
    for n in 5..=12 {
        let t = run_elimination(n).unwrap();
        for col in 0..t.base_curves_on_s[0].len() {
            let seq: Vec<usize> = t.base_curves_on_s.iter().map(|row| row[col]).collect();
            for w in seq.windows(2) {
                assert!(w[1] == w[0].saturating_sub(1), "n={n} column {col}: {seq:?}");
            }
            assert_eq!(*seq.last().unwrap(), 0);
        }
    }
}

#[test]
fn odp_census() {
    for n in 4..=12 {
        let t = run_elimination(n).unwrap();
        assert_eq!(t.initial_odps, 2 * (n - 1));
        if n <= 5 {
            assert_eq!(t.odps_per_stage.get(2).copied().unwrap_or(0), 0, "n={n}");
        }
        if n <= 6 {
            assert_eq!(t.odps_per_stage.get(3).copied().unwrap_or(0), 0, "n={n}");
        }
    }
    // quadruple points for 4 <= i <= 5, 3 <= j <= i-1, on each real half
    let pairs = (4..=5).flat_map(|i| (3..i).map(move |j| (i, j))).count();
    assert_eq!(run_elimination(7).unwrap().odps_per_stage[2], 2 * pairs);
}

#[test]
fn twistor_lines() {
    for n in 4..=12 {
        let t = run_elimination(n).unwrap();
        for i in 2..=n - 2 {
            let l = twistor_line_degree(&t, i).unwrap();
            assert_eq!(l.initial, 2 * (i as i64 - 1));
            assert_eq!(l.decrement_stages.len(), i - 2);
            assert_eq!(l.final_degree, 2);
        }
        assert!(twistor_line_degree(&t, n - 1).is_err());
        assert_eq!(twistor_line_degree(&t, 1).unwrap().final_degree, 2);
    }
}

#[test]
fn blowup_counts() {
    for n in 4..=12 {
        let t = run_elimination(n).unwrap();
        assert_eq!((t.fiber_family_blowups, t.ladder_family_blowups), (n - 4, n - 3));
    }
}
