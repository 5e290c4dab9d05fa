use rfb_dyn::sweep::{extract_boundary, run_sweep, run_sweep_sequential, SweepSpec, TimeCap};

fn small(workers: Option<usize>) -> SweepSpec {
    SweepSpec {
        w_range: (0.02, 0.2),
        w_count: 4,
        c_range: (0.05, 0.5),
        c_count: 3,
        time_cap: TimeCap {
            factor: 8.0,
            floor: 500.0,
            ceiling: 2000.0,
        },
        workers,
        ..Default::default()
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let one = run_sweep(&small(Some(1))).unwrap();
    let three = run_sweep(&small(Some(3))).unwrap();
    let global = run_sweep(&small(None)).unwrap();
    let sequential = run_sweep_sequential(&small(Some(3))).unwrap();
    assert_eq!(format!("{one:?}"), format!("{sequential:?}"));
    // Debug output compares NaN cells too
    assert_eq!(format!("{one:?}"), format!("{three:?}"));
    assert_eq!(format!("{one:?}"), format!("{global:?}"));
    assert_eq!(one.cells.len(), 12);
    for (k, cell) in one.cells.iter().enumerate() {
        assert_eq!(cell.w_l_per_min, one.w_axis[k % 4]);
        assert_eq!(cell.c_c0, one.c_axis[k / 4]);
        assert!(cell.conservation_residual < 1e-9, "{cell:?}");
    }
}

#[test]
fn boundary_lies_inside_the_grid() {
    let result = run_sweep(&small(None)).unwrap();
    if let Ok(boundary) = extract_boundary(&result, 0.95) {
        for p in boundary {
            assert!(p.w_star >= 0.02 && p.w_star <= 0.2);
        }
    }
}

#[test]
fn zero_workers_is_rejected() {
    assert!(run_sweep(&small(Some(0))).is_err());
}
