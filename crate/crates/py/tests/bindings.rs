use mehler_py::{avg_number, box_kernel, decay_bound, heat_kernel, mehler_kernel, trace_infinite};

#[test]
fn wrappers_match_closed_forms() {
    let v = trace_infinite(1.0, 1.0, 1).unwrap();
    assert!((v - 1.0 / (2.0 * 0.5f64.sinh())).abs() < 1e-15);
    let h = heat_kernel(vec![0.0], vec![0.0], 1.0).unwrap();
    assert!((h - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    let a = mehler_kernel(vec![0.1, 0.2], vec![-0.3, 0.0], 0.5, 1.0, 2.0).unwrap();
    let b = mehler_kernel(vec![-0.3, 0.0], vec![0.1, 0.2], 0.5, 1.0, 2.0).unwrap();
    assert!((a - b).abs() < 1e-15 * a);
    let (k, tail) = box_kernel(vec![0.0], vec![0.0], 0.1, 2.0, None).unwrap();
    let free = heat_kernel(vec![0.0], vec![0.0], 0.1).unwrap();
    assert!(k > 0.0 && k <= free && (free - k) < 1e-4 && tail >= 0.0);
    assert!(decay_bound(1.0, 4.0, 1.0, 1, 2.0).unwrap() > decay_bound(1.0, 5.0, 1.0, 1, 2.0).unwrap());
    let (n, err) = avg_number(1.0, 0.3, 1.0, 1, None, 1e-12, 1024).unwrap();
    assert!(n > 0.0 && err < 1e-12);
}

#[test]
fn invalid_arguments_are_errors() {
    assert!(trace_infinite(-1.0, 1.0, 1).is_err());
    assert!(trace_infinite(1.0, 1.0, 4).is_err());
    assert!(avg_number(1.0, 2.0, 1.0, 1, None, 1e-12, 1024).is_err());
    assert!(box_kernel(vec![5.0], vec![0.0], 1.0, 2.0, None).is_err());
}
