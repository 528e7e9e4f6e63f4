#include "covidcast_app.hpp"

int main(int argc, char** argv) { return covidcast::app::run_cli(argc, argv); }
