//! Cross-module scenarios: the modules composed the way an experiment
//! actually uses them.

use wemlab::blockmodel::{enumerate_states, BlockShape, MemoryModel, Scm};
use wemlab::codecraft::Rational;
use wemlab::flipsim::{EncodingKind, HashTableSim, InsertOutcome};
use wemlab::search::{redundant_search, Objective};
use wemlab::semilinear::search_matrix;
use wemlab::setcodec::{compressed_code, RankedCodec};

#[test]
fn compressed_code_feeds_redundancy_search() {
    let shape = BlockShape::new(2, 3).unwrap();
    let model = MemoryModel::loads();

    // 1 + 4 + 6 + 4 = 15 set states in 64 words leaves real redundancy
    let codec = RankedCodec::new(shape, model).unwrap();
    assert_eq!(codec.total(), 15);
    assert_eq!(codec.payload_bits(), 4);
    assert_eq!(codec.redundancy_bits(), 2);

    let base = compressed_code(shape, model).unwrap();
    base.validate().unwrap();

    let report = redundant_search(shape, model, Objective::Max, 11, 400, None).unwrap();
    assert_eq!(report.baseline, base.cost_report().unwrap());
    report.best_code.validate().unwrap();
    // the best code still covers exactly the model's collection states
    let domain = enumerate_states(shape, model).unwrap();
    assert_eq!(report.best_code.states().len(), domain.len());
    for state in &domain {
        assert!(report.best_code.encode(state).is_some(), "missing {state}");
    }
    assert_eq!(report.best_code.cost_report().unwrap(), report.best_found);
}

#[test]
fn searched_matrix_cost_equals_its_worst_column() {
    // under write/delete, every transition adds or removes one value, so
    // the derived block code's worst cost is its worst non-NULL column
    let shape = BlockShape::new(2, 2).unwrap();
    let report = search_matrix(shape, 128, 21).unwrap();
    let matrix = report.best.expect("4-column matrices pass often");
    let code = matrix.block_code().unwrap();
    code.validate().unwrap();
    let worst_column = (1..=shape.max_value())
        .map(|v| matrix.column(v).weight())
        .max()
        .unwrap();
    assert_eq!(code.cost_report().unwrap().max_cost, worst_column);
}

#[test]
fn simulator_flips_match_code_write_costs() {
    // one insert per empty block: the simulator must charge exactly the
    // codeword distance the code predicts
    let shape = BlockShape::new(3, 2).unwrap();
    let code = EncodingKind::Compressed.build(shape, 0).unwrap();
    for key in 1..=shape.max_value() {
        let mut table = HashTableSim::new(shape, 1, code.clone(), 5).unwrap();
        let empty = code.encode(&"[]".parse().unwrap()).unwrap()[0];
        let singleton = code.encode(&format!("[{key}]").parse().unwrap()).unwrap()[0];
        let predicted = wemlab::bitspace::hamming_distance(&empty, &singleton).unwrap();
        match table.insert(key).unwrap() {
            InsertOutcome::Inserted { flips, .. } => assert_eq!(flips, predicted, "key {key}"),
            other => panic!("unexpected outcome {other:?}"),
        }
    }
}

#[test]
fn rate_orders_the_models_by_information_content() {
    // fewer valid states means a lower rate; properties only remove states
    let shape = BlockShape::new(2, 2).unwrap();
    let gmm = wemlab::blockmodel::rate(shape, MemoryModel::gmm()).unwrap();
    let loa = wemlab::blockmodel::rate(shape, MemoryModel::new(true, false, Scm::None)).unwrap();
    let set = wemlab::blockmodel::rate(shape, MemoryModel::set_model()).unwrap();
    assert_eq!(gmm, 1.0);
    assert!(loa < gmm);
    assert!(set < loa);

    // indicator optimality is visible through the generic metric path too
    let indicator = wemlab::codecraft::indicator_code(shape).unwrap();
    let report = indicator.cost_report().unwrap();
    assert_eq!(report.avg_cost, Rational::from_integer(report.max_cost as u64));
}
