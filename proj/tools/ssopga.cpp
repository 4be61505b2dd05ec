#include <ssopga/cli.hpp>

int main(int argc, char** argv)
{
    return ssopga::cli_main(argc, argv);
}
