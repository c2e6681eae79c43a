#include "skinrelax/cli.hpp"

int main(int argc, char** argv)
{
    return skin::cli_main(argc, argv);
}
