#include <cstdio>

int main() {
    std::puts("varblur: subcommands pending");
    return 0;
}
