#![no_main]

use infosel_core::record::write_records;
use infosel_core::parse_records;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(records) = parse_records(data) else { return };
    for r in &records {
        assert!(r.score.is_finite());
        assert!(!r.agent.is_empty() && !r.problem.is_empty());
    }
    // whatever parses must survive a write/read cycle unchanged
    let mut out = Vec::new();
    write_records(&mut out, &records).unwrap();
    let again = parse_records(&out[..]).unwrap();
    assert_eq!(records.len(), again.len());
    for (a, b) in records.iter().zip(&again) {
        assert_eq!((&a.agent, &a.problem, a.score.to_bits(), a.win), (&b.agent, &b.problem, b.score.to_bits(), b.win));
    }
});
