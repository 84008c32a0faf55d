fn main() { std::process::exit(morse_ainfty::cli::main_entry()); }
