//! The map (x1, x2) -> (x1, conj x2) on C^2 is real linear and norm
//! preserving but not complex linear. Prints the same report as
//! `wigner demo-ratz --output table`.

fn main() {
    let args = ["wigner", "--output", "table", "demo-ratz"];
    let code = wigner_check::cli::run(args, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
