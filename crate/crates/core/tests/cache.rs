use std::sync::Arc;
use std::thread;

use fadingmgf::expfit::{FitCache, FitOptions, FitStore};
use fadingmgf::mgf::{MgfEvaluator, MgfStrategy};
use fadingmgf::FadingModel;

#[test]
fn concurrent_requests_fit_once() {
    let cache = Arc::new(FitCache::default());
    let handles: Vec<_> = (0..6)
        .map(|_| {
            let c = Arc::clone(&cache);
            thread::spawn(move || c.get_or_fit(1.5).unwrap())
        })
        .collect();
    let fits: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert_eq!(cache.optimizer_runs(), 1);
    assert!(fits.windows(2).all(|w| w[0] == w[1]));
    cache.get_or_fit(1.5).unwrap();
    assert_eq!(cache.optimizer_runs(), 1);
}

#[test]
fn unit_stretch_needs_no_optimization() {
    let cache = FitCache::default();
    let f = cache.get_or_fit(1.0).unwrap();
    assert_eq!(cache.optimizer_runs(), 0);
    assert_eq!(f.max_abs_err, 0.0);
    assert_eq!(f.a.iter().sum::<f64>(), 1.0);
}

#[test]
fn evaluators_share_the_cached_fit() {
    let cache = FitCache::default();
    let m = FadingModel::AlphaMu { alpha: 3.0, mu: 1.2, gbar: 2.0 };
    for _ in 0..3 {
        MgfEvaluator::new(&m, MgfStrategy::Auto, &cache).unwrap();
    }
    assert_eq!(cache.optimizer_runs(), 1);
}

#[test]
fn store_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fits.txt");
    let first = FitCache::with_store(&path, FitOptions::default()).unwrap();
    let fit = first.get_or_fit(1.25).unwrap();
    assert_eq!(first.optimizer_runs(), 1);

    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("expfit-v1\n"));
    let parsed = FitStore::parse(&text).unwrap();
    assert_eq!(parsed.fits, vec![fit.clone()]);
    assert_eq!(parsed.to_text(), text);

    let second = FitCache::with_store(&path, FitOptions::default()).unwrap();
    assert!(second.contains(1.25));
    assert_eq!(second.get_or_fit(1.25).unwrap(), fit);
    assert_eq!(second.optimizer_runs(), 0);
}

#[test]
fn gate_failures_are_reported_with_the_fit() {
    let cache = FitCache::default();
    match cache.get_or_fit(2.0) {
        Err(fadingmgf::Error::FitQuality { fit, gate }) => {
            assert!(fit.max_abs_err > gate);
            assert!((fit.a.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
        other => panic!("expected a quality-gate error, got {other:?}"),
    }
}
