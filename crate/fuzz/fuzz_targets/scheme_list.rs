#![no_main]

use cfran::transceiver::Scheme;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(list) = Scheme::parse_list(text) {
        let joined: Vec<&str> = list.iter().map(|s| s.tag()).collect();
        assert_eq!(Scheme::parse_list(&joined.join(",")).unwrap(), list);
    }
});
