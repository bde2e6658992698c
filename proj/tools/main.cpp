#include <cstdio>

int main() {
    std::puts("kslab: subcommands land here as modules come online");
    return 0;
}
