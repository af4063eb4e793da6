#![no_main]

use infosel_synth::{generate, Archetype, SynthSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(kinds) = text.split(',').map(Archetype::parse).collect::<Result<Vec<_>, _>>() else { return };
    let spec = SynthSpec::cycled(3, kinds.len().min(6), &kinds, 2, 0);
    if spec.validate().is_ok() {
        assert_eq!(generate(&spec).unwrap().len(), 3 * kinds.len().min(6) * 2);
    }
});
