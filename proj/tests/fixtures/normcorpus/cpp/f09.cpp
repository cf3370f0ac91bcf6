#include <iostream>

int main() {
    /* print a triangle */
    for (int row = 1; row <= 5; row++) {
        // one line per row
        for (int col = 0; col < row; col++) {
            std::cout << '*';
        }
        std::cout << '\n';
    }
    return 0;
}
