use serde::Serializer;

/// Serialize an extended real. JSON has no infinity, so non-finite values are
/// written as the strings `"inf"`, `"-inf"` and `"nan"`.
pub(crate) fn ext_f64<S: Serializer>(v: &f64, s: S) -> core::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub(crate) fn ext_f64_opt_pair<S: Serializer>(
    v: &Option<[f64; 2]>,
    s: S,
) -> core::result::Result<S::Ok, S::Error> {
    match v {
        None => s.serialize_none(),
        Some([a, b]) => {
            use serde::ser::SerializeSeq;
            let mut seq = s.serialize_seq(Some(2))?;
            seq.serialize_element(&Ext(*a))?;
            seq.serialize_element(&Ext(*b))?;
            seq.end()
        }
    }
}

/// Newtype carrying the extended-real serialization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Ext(pub f64);

impl serde::Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        ext_f64(&self.0, s)
    }
}
