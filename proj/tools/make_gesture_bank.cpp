// Writes the default HSV range and the measured template bank as gesture.json.

#include <iostream>

#include "diverlink/json_io.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_gesture_bank <out.json>\n";
    return 1;
  }
  try {
    diverlink::write_json_file(argv[1], diverlink::to_json(diverlink::default_gesture_config()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
