#![no_main]

use cfran::deployment::Partition;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = Partition::from_json(text) {
        assert_eq!(Partition::from_json(&p.to_json()).unwrap(), p);
        assert_eq!(p.groups().iter().map(Vec::len).sum::<usize>(), p.num_oru());
    }
});
