fn main() {
    println!("gkin: under construction");
}
