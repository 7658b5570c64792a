#include "photogeo/cli.hpp"

int main(int argc, char** argv)
{
    return photogeo::run_cli(argc, argv);
}
