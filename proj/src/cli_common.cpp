#include <iostream>

#include "condaudio/cli.hpp"
#include "condaudio/errors.hpp"

namespace condaudio::cli {

int run_guarded(const std::string& what, int (*fn)(const void*), const void* opts) {
  try {
    return fn(opts);
  } catch (const DivergenceError& e) {
    std::cerr << what << ": " << e.what() << "\n";
    return kExitDivergence;
  } catch (const DataError& e) {
    std::cerr << what << ": " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << what << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << what << ": " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace condaudio::cli
