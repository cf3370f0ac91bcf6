// ternary-flavored accessor
using System;

class Access {
    static int Pick(bool flag, int yes, int no) {
        return flag ? yes : no;  /* inline select */
    }

    static void Main() {
        Console.WriteLine(Pick(true, 1, 2));
    }
}
