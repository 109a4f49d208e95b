use mimo_aging::channel::{drop_users, CellGeometry, FadingProfile};
use mimo_aging::{Error, Rng};
use proptest::prelude::*;

proptest! {
    #[test]
    fn drops_survive_a_file_round_trip(seed in any::<u64>(), k in 1usize..40, sigma in 0.0f64..12.0) {
        let geometry = CellGeometry::new(1000.0, 100.0, 3.8, sigma).unwrap();
        let profile = drop_users(k, &geometry, &mut Rng::new(seed, 0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("drop.csv");
        profile.save(&path).unwrap();
        prop_assert_eq!(FadingProfile::load(&path).unwrap(), profile);
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        FadingProfile::load(dir.path().join("none")),
        Err(Error::Io(_))
    ));
}

#[test]
fn custom_geometry_is_restored() {
    let geometry = CellGeometry::new(500.0, 35.0, 3.0, 6.0).unwrap();
    let profile = drop_users(5, &geometry, &mut Rng::new(1, 1)).unwrap();
    let mut buf = Vec::new();
    profile.write_to(&mut buf).unwrap();
    let back = FadingProfile::read_from(buf.as_slice()).unwrap();
    assert_eq!(back.geometry(), &geometry);
}
