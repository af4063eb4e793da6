#![no_main]

use infosel_core::stats_io::{read_stats_json, write_stats_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(table) = read_stats_json(data) else { return };
    let mut first = Vec::new();
    write_stats_json(&mut first, &table).unwrap();
    let mut second = Vec::new();
    write_stats_json(&mut second, &read_stats_json(&first[..]).unwrap()).unwrap();
    assert_eq!(first, second);
});
