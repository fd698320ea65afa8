use std::collections::BTreeMap;

use acnum_cli::config::{CommandKind, ExperimentConfig};
use acnum_cli::{ExperimentRecord, Measurement};
use proptest::prelude::*;
use serde_json::{json, Value};

fn measurement_value() -> impl Strategy<Value = Value> {
    prop_oneof![
        any::<f64>().prop_map(|v| serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)),
        any::<u64>().prop_map(Value::from),
        any::<i64>().prop_map(Value::from),
        Just(Value::Null),
    ]
}

proptest! {
    #[test]
    fn records_round_trip(
        seed in any::<u64>(),
        t in any::<f64>().prop_filter("finite", |v| v.is_finite()),
        n in 1usize..100,
        values in prop::collection::vec(measurement_value(), 0..6),
        flags in prop::collection::btree_map("[a-z_]{1,8}", any::<bool>(), 0..4),
        tol in 0.0f64..1.0,
        wall in 0.0f64..1e4,
    ) {
        let mut config = ExperimentConfig::new(CommandKind::WitnessAudit);
        config.seed = seed;
        config.params = json!({"n": n, "t": t}).as_object().unwrap().clone();
        config.tolerances = BTreeMap::from([("slack".to_string(), tol)]);
        let record = ExperimentRecord {
            config,
            measurements: values.into_iter().enumerate().map(|(i, value)| Measurement { name: format!("m{i}"), value }).collect(),
            pass_flags: flags,
            wall_time: wall,
        };
        let text = record.to_json();
        let back = ExperimentRecord::from_json(&text).unwrap();
        prop_assert_eq!(&back, &record);
        prop_assert_eq!(back.to_json(), text);
    }
}
