//! Drives the command-line front end in-process and captures its output.

fn main() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = fadingmgf::cli::run_with(
        ["fadingmgf", "mgf", "--model", "family=alpha-mu,alpha=2,mu=1.5,gbar-db=3", "--strategy", "approx,numeric", "--s-values", "0,0.5,5,50"],
        &mut out,
        &mut err,
    );
    println!("exit {code}");
    print!("{}", String::from_utf8_lossy(&out));
    eprint!("{}", String::from_utf8_lossy(&err));
}
