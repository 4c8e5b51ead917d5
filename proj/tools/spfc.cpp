// placeholder; full CLI lands with the report pipeline
#include <cstdio>
int main() { std::puts("spfc: not yet wired"); return 2; }
