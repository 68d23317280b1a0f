#![no_main]

use cfran::association::EduAssociation;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // First byte picks the expected shape, the rest is the file.
    let Some((&shape, body)) = data.split_first() else { return };
    let num_ue = usize::from(shape & 0x0f) + 1;
    let num_edu = usize::from(shape >> 4) + 1;
    if let Ok(a) = EduAssociation::from_csv(body, num_ue, num_edu) {
        let again = EduAssociation::from_csv(a.to_csv().as_bytes(), num_ue, num_edu).unwrap();
        assert_eq!(again, a);
    }
});
