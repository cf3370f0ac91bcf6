public class Tiny {
    static int negate(int x) {
        return -x;
    }
}
