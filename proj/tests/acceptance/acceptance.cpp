// placeholder: filled in by the acceptance suite implementation
int main() { return 1; }
