// ternary accessor with block comments
public class Access {
    static int pick(boolean flag, int yes, int no) {
        return flag ? yes : no;  /* inline select */
    }

    public static void main(String[] args) {
        System.out.println(pick(false, 1, 2));
    }
}
