//! Prints the model manifest as JSON; `models.json` at the repo root is this output.

fn main() {
    println!("{}", serde_json::to_string_pretty(&smithcal::models::manifest()).expect("serializable"));
}
