#include <cstdio>
int main() { std::puts("qdlab: experiments not wired yet"); return 2; }
