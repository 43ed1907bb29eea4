int main(int fd) {
    char a[32];
    char b[32];
    read(fd, a, 32); // source:a
    gets(b); // source:b
    system(a); // sink:a
    exec(b); // sink:b
    return 0;
}
