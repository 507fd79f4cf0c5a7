use ro_init::bench::*;

#[test]
fn quantiles_interpolate() {
    let q = Quartiles::of([4.0, 1.0, 3.0, 2.0, f64::NAN]);
    assert_eq!(q.median, 2.5);
    assert_eq!(q.q1, 1.75);
    assert_eq!(q.q3, 3.25);
}

#[test]
fn nine_significant_digits() {
    assert_eq!(sig9(1.0 / 3.0), "3.33333333e-1");
    assert_eq!(sig9(0.0), "0.00000000e0");
    assert_eq!(sig9(f64::NAN), "nan");
}

#[test]
fn trial_seeds_differ() {
    assert_ne!(trial_seed(1, 0), trial_seed(1, 1));
    assert_eq!(trial_seed(1, 5) ^ trial_seed(2, 5), 3);
}
