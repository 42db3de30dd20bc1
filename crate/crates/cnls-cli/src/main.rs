fn main() {
    eprintln!("cnls: not yet wired");
    std::process::exit(2);
}
