//! Round trips of configs, snapshots and tables.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gpmix::field::Field2C;
use gpmix::grid::Grid3;
use gpmix::io::config::{normalize, LimitKind, PotentialConfig, RunConfig, ScheduleKind};
use gpmix::io::snapshot::{read_snapshot, write_snapshot};

#[test]
fn sweep_config_round_trips() {
    let text = "schema_version = 1\n\n[sweep]\n# the standard ladder\nn_list = 4,8,16,32\nschedule = fixed\n\n[coupling]\nlambda = 1\n";
    let cfg = RunConfig::parse(text).unwrap();
    assert_eq!(cfg.sweep.n_list, vec![4, 8, 16, 32]);
    let canon = normalize(text).unwrap();
    assert_eq!(cfg.to_text(), canon);
    assert_eq!(normalize(&canon).unwrap(), canon);
}

fn arb_config() -> impl Strategy<Value = RunConfig> {
    (
        prop::sample::select(vec![8usize, 16, 24, 32, 48]),
        0.5f64..100.0,
        1.0f64..1e4,
        1u64..1000,
        prop::collection::vec(1u64..128, 1..6),
        any::<bool>(),
        any::<bool>(),
        0.01f64..0.99,
        prop::collection::vec(1.0f64..500.0, 1..5),
        (0.0f64..10.0, 0.0f64..0.9, 0.1f64..3.0),
    )
        .prop_map(|(n, l, lambda, np, n_list, log, hard, frac, radii, (v0, r0, b))| {
            let mut c = RunConfig::default();
            c.grid.n = n;
            c.grid.box_length = l;
            c.coupling.lambda = lambda;
            c.coupling.n_particles = np;
            c.coupling.fraction = frac;
            c.coupling.radii = radii;
            c.sweep.n_list = n_list;
            c.sweep.schedule = if log { ScheduleKind::Log } else { ScheduleKind::Fixed };
            c.sweep.limit = if hard { LimitKind::HardCore } else { LimitKind::ScatteringLength };
            c.potentials[2] = PotentialConfig::Shell { v0, r0: r0 * b, b };
            c
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_text_round_trips(cfg in arb_config()) {
        let text = cfg.to_text();
        prop_assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
        prop_assert_eq!(normalize(&text).unwrap(), text);
    }
}

#[test]
fn snapshot_round_trip_is_bit_exact() {
    let g = Grid3::new(10, 3.7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut draw = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let a: Vec<Complex64> = (0..g.len()).map(|_| draw()).collect();
    let b: Vec<Complex64> = (0..g.len()).map(|_| draw()).collect();
    let f = Field2C::from_arrays(g, a, b, 1.0 / 3.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.bin");
    write_snapshot(&f, &path).unwrap();
    let back = read_snapshot(&path).unwrap();
    assert_eq!(back.grid, f.grid);
    assert_eq!(back.t.to_bits(), f.t.to_bits());
    for s in 0..2 {
        for (x, y) in back.phi[s].iter().zip(&f.phi[s]) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 16]).unwrap();
    assert!(matches!(read_snapshot(&path), Err(gpmix::Error::Snapshot(_))));
}
