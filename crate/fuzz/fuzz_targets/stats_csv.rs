#![no_main]

use infosel_core::stats_io::{read_stats_csv, write_stats_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(table) = read_stats_csv(data) else { return };
    let mut out = Vec::new();
    write_stats_csv(&mut out, &table).unwrap();
    assert_eq!(read_stats_csv(&out[..]).unwrap(), table);
});
