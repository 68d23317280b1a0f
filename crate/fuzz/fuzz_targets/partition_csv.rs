#![no_main]

use cfran::deployment::Partition;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(p) = Partition::from_csv(data) {
        assert_eq!(Partition::from_csv(p.to_csv().as_bytes()).unwrap(), p);
        assert!(p.group_sizes().iter().all(|&s| s > 0));
    }
});
