/// x rounded to 12 significant digits, printed in the shortest form that
/// round-trips the rounded value.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    r.to_string()
}
